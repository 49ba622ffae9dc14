#include "otrack/grid.hpp"

#include <algorithm>
#include <sstream>

namespace otrack {

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

PointM2 PointM2::canonical() const { return {x, y, wrap_angle(theta)}; }

GridM2::GridM2(int nx_, int ny_, int ntheta_, double x0_, double y0_)
    : nx(nx_), ny(ny_), ntheta(ntheta_), x0(x0_), y0(y0_) {
    require(nx > 0 && ny > 0 && ntheta > 0, ErrorKind::Config, "grid dimensions must be positive");
}

namespace {

// Lower cell corner and fraction along one non-periodic axis.
bool axis_cell(double q, int n, int& i0, double& t) {
    constexpr double slack = 1e-9;
    if (q < -slack || q > n - 1 + slack) return false;
    if (n == 1) {
        i0 = 0;
        t = 0;
        return true;
    }
    q = std::clamp(q, 0.0, double(n - 1));
    i0 = std::min(int(std::floor(q)), n - 2);
    t = q - i0;
    return true;
}

}  // namespace

Trilinear trilinear(const GridM2& g, const Vec3& q) {
    int i0, j0, k0, k1;
    double tx, ty, tk;
    if (!axis_cell(q[0], g.nx, i0, tx) || !axis_cell(q[1], g.ny, j0, ty)) {
        std::ostringstream os;
        os << "point (" << q[0] << ", " << q[1] << ") outside the spatial grid";
        fail(ErrorKind::Domain, os.str());
    }
    if (g.periodic) {
        double kf = std::floor(q[2]);
        tk = q[2] - kf;
        k0 = g.wrap_k(int(kf));
        k1 = g.wrap_k(k0 + 1);
    } else {
        if (!axis_cell(q[2], g.ntheta, k0, tk)) fail(ErrorKind::Domain, "point outside the third grid axis");
        k1 = std::min(k0 + 1, g.ntheta - 1);
    }
    int i1 = std::min(i0 + 1, g.nx - 1), j1 = std::min(j0 + 1, g.ny - 1);
    Trilinear t;
    int n = 0;
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                t.idx[n] = g.index(a ? i1 : i0, b ? j1 : j0, c ? k1 : k0);
                t.w[n] = (a ? tx : 1 - tx) * (b ? ty : 1 - ty) * (c ? tk : 1 - tk);
                ++n;
            }
    return t;
}

TrilinearGradient trilinear_gradient(const GridM2& g, const Vec3& q) {
    // Same cell as trilinear(); weights are products of 1D hat functions.
    Trilinear t = trilinear(g, q);
    TrilinearGradient out;
    out.idx = t.idx;
    auto frac = [](double v, int n, bool wrap) {
        if (wrap) return v - std::floor(v);
        if (n == 1) return 0.0;
        v = std::clamp(v, 0.0, double(n - 1));
        return v - std::min(std::floor(v), double(n - 2));
    };
    const double tx = frac(q[0], g.nx, false), ty = frac(q[1], g.ny, false), tk = frac(q[2], g.ntheta, g.periodic);
    int n = 0;
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                const double wx = a ? tx : 1 - tx, wy = b ? ty : 1 - ty, wk = c ? tk : 1 - tk;
                const double sx = a ? 1 : -1, sy = b ? 1 : -1, sk = c ? 1 : -1;
                out.dw[n] = Vec3(g.nx > 1 ? sx * wy * wk : 0.0, g.ny > 1 ? sy * wx * wk : 0.0,
                                 g.ntheta > 1 ? sk * wx * wy : 0.0);
                ++n;
            }
    return out;
}

double interpolate_index(const LiftedField& f, const Vec3& q) {
    Trilinear t = trilinear(f.grid, q);
    double v = 0;
    for (int n = 0; n < 8; ++n)
        if (t.w[n] != 0.0) v += t.w[n] * f.values[t.idx[n]];
    return v;
}

double interpolate(const LiftedField& f, const PointM2& p) { return interpolate_index(f, f.grid.to_index(p)); }

CovectorM2 gradient_fixed(const LiftedField& f, int i, int j, int k) {
    const GridM2& g = f.grid;
    auto diff = [&](int n, int c, auto at) {
        if (n == 1) return 0.0;
        if (c == 0) return at(1) - at(0);
        if (c == n - 1) return at(n - 1) - at(n - 2);
        return 0.5 * (at(c + 1) - at(c - 1));
    };
    double dx = diff(g.nx, i, [&](int a) { return f(a, j, k); });
    double dy = diff(g.ny, j, [&](int b) { return f(i, b, k); });
    double dk;
    if (g.periodic)
        dk = g.ntheta == 1 ? 0.0 : 0.5 * (f(i, j, g.wrap_k(k + 1)) - f(i, j, g.wrap_k(k - 1)));
    else
        dk = diff(g.ntheta, k, [&](int c) { return f(i, j, c); });
    return {dx, dy, dk / g.htheta()};
}

}  // namespace otrack
