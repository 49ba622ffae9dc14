#include "otrack/frame.hpp"

namespace otrack {

std::array<Vec3, 3> left_invariant_frame_at(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {Vec3(c, s, 0), Vec3(-s, c, 0), Vec3(0, 0, 1)};
}

FrameM2 left_invariant_frame(const GridM2& g) {
    FrameM2 f;
    f.grid = g;
    f.A.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) f.A[n] = left_invariant_frame_at(g.theta(g.coords(n)[2]));
    f.omega = f.A;
    return f;
}

Mat3 left_invariant_rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat3 B;
    B << c, s, 0, -s, c, 0, 0, 0, 1;
    return B;
}

FrameSample sample_frame(const GaugeFrameField& f, const Vec3& q) {
    // Interpolate components relative to the left-invariant frame, then rebuild at the exact angle.
    const GridM2& g = f.grid;
    Trilinear t = trilinear(g, q);
    Mat3 a = Mat3::Zero(), b = Mat3::Zero();
    FrameSample s;
    s.alpha.setZero();
    for (int n = 0; n < 8; ++n) {
        if (t.w[n] == 0.0) continue;
        const std::size_t v = t.idx[n];
        const auto li = left_invariant_frame_at(g.theta(g.coords(v)[2]));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(i, j) += t.w[n] * li[j].dot(f.A[v][i]);
                b(i, j) += t.w[n] * li[j].dot(f.omega[v][i]);
            }
        s.alpha += t.w[n] * f.alpha[v];
    }
    const auto li = left_invariant_frame_at(q[2] * g.htheta());
    for (int i = 0; i < 3; ++i) {
        s.A[i] = a(i, 0) * li[0] + a(i, 1) * li[1] + a(i, 2) * li[2];
        s.omega[i] = b(i, 0) * li[0] + b(i, 1) * li[1] + b(i, 2) * li[2];
    }
    return s;
}

}  // namespace otrack
