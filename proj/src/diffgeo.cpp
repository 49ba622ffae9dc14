#include "otrack/diffgeo.hpp"

#include <algorithm>

namespace otrack {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0) return {1.0};
    const int r = int(std::ceil(4 * sigma));
    std::vector<double> k(2 * r + 1);
    double sum = 0;
    for (int d = -r; d <= r; ++d) sum += k[d + r] = std::exp(-0.5 * d * d / (sigma * sigma));
    for (double& v : k) v /= sum;
    return k;
}

// One 1D convolution pass along `axis`.
LiftedField convolve_axis(const LiftedField& f, int axis, const std::vector<double>& ker) {
    if (ker.size() == 1) return f;
    const GridM2& g = f.grid;
    const int r = int(ker.size() / 2);
    const int n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.ntheta;
    const bool wrap = axis == 2 && g.periodic;
    LiftedField out(g);
    for (int k = 0; k < g.ntheta; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int c = axis == 0 ? i : axis == 1 ? j : k;
                double s = 0;
                for (int d = -r; d <= r; ++d) {
                    int cc = c + d;
                    cc = wrap ? ((cc % n) + n) % n : std::clamp(cc, 0, n - 1);
                    s += ker[d + r] * (axis == 0 ? f(cc, j, k) : axis == 1 ? f(i, cc, k) : f(i, j, cc));
                }
                out(i, j, k) = s;
            }
    return out;
}

// Finite difference of order 1 or 2 along one axis in physical units.
LiftedField difference(const LiftedField& f, int axis, int order) {
    const GridM2& g = f.grid;
    const int n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.ntheta;
    const bool wrap = axis == 2 && g.periodic;
    const double h = axis == 2 ? g.htheta() : 1.0;
    LiftedField out(g);
    for (int k = 0; k < g.ntheta; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int c = axis == 0 ? i : axis == 1 ? j : k;
                auto at = [&](int cc) {
                    if (wrap) cc = ((cc % n) + n) % n;
                    return axis == 0 ? f(cc, j, k) : axis == 1 ? f(i, cc, k) : f(i, j, cc);
                };
                double v = 0;
                if (order == 1) {
                    if (wrap)
                        v = n > 1 ? 0.5 * (at(c + 1) - at(c - 1)) : 0.0;
                    else if (n == 1)
                        v = 0;
                    else if (c == 0)
                        v = at(1) - at(0);
                    else if (c == n - 1)
                        v = at(n - 1) - at(n - 2);
                    else
                        v = 0.5 * (at(c + 1) - at(c - 1));
                    v /= h;
                } else {
                    int m = c;
                    if (!wrap) {
                        if (n < 3) m = -1;
                        else m = std::clamp(c, 1, n - 2);
                    }
                    v = m < 0 && !wrap ? 0.0 : (at(m + 1) - 2 * at(m) + at(m - 1)) / (h * h);
                }
                out(i, j, k) = v;
            }
    return out;
}

}  // namespace

LiftedField gaussian_smooth(const LiftedField& U, double sigma_s, double sigma_a) {
    require(sigma_s >= 0 && sigma_a >= 0, ErrorKind::Config, "Gaussian scales must be nonnegative");
    const auto ks = gaussian_kernel(sigma_s);
    const auto ka = gaussian_kernel(sigma_a / U.grid.htheta());
    return convolve_axis(convolve_axis(convolve_axis(U, 0, ks), 1, ks), 2, ka);
}

LiftedField gaussian_derivative(const LiftedField& U, std::array<int, 3> order, double sigma_s, double sigma_a) {
    for (int o : order) require(o >= 0, ErrorKind::Config, "negative derivative order");
    require(order[0] + order[1] + order[2] <= 2, ErrorKind::Config, "derivative order beyond 2");
    LiftedField f = gaussian_smooth(U, sigma_s, sigma_a);
    for (int axis = 0; axis < 3; ++axis) {
        if (order[axis] == 2)
            f = difference(f, axis, 2);
        else if (order[axis] == 1)
            f = difference(f, axis, 1);
    }
    return f;
}

HessianField hessian_field(const LiftedField& U, double xi, double sigma_s_ext, double sigma_a_ext) {
    require(xi > 0, ErrorKind::Config, "xi must be positive");
    const LiftedField S = gaussian_smooth(U, sigma_s_ext, sigma_a_ext);
    const LiftedField Ux = difference(S, 0, 1), Uy = difference(S, 1, 1);
    const LiftedField Uxx = difference(S, 0, 2), Uyy = difference(S, 1, 2), Utt = difference(S, 2, 2);
    const LiftedField Uxy = difference(Ux, 1, 1), Uxt = difference(Ux, 2, 1), Uyt = difference(Uy, 2, 1);
    HessianField out;
    out.grid = U.grid;
    out.xi = xi;
    out.H.resize(U.grid.size());
    out.max_norm.resize(U.grid.size());
    for (std::size_t n = 0; n < U.grid.size(); ++n) {
        Mat3& H = out.H[n];
        H << Uxx.values[n], Uxy.values[n], Uxt.values[n] + Uy.values[n],  //
            Uxy.values[n], Uyy.values[n], Uyt.values[n] - Ux.values[n],    //
            Uxt.values[n], Uyt.values[n], Utt.values[n];
        Eigen::SelfAdjointEigenSolver<Mat3> es(hessian_form(out, n), Eigen::EigenvaluesOnly);
        out.max_norm[n] = std::max(0.0, es.eigenvalues()[2]);
    }
    return out;
}

Mat3 hessian_form(const HessianField& H, std::size_t n) {
    const Vec3 m2(1 / (H.xi * H.xi), 1 / (H.xi * H.xi), 1);
    Mat3 F = H.H[n] * m2.asDiagonal() * H.H[n].transpose();
    return 0.5 * (F + F.transpose());
}

double dual_norm_sq(const HessianField& H, std::size_t n, const TangentM2& p) {
    const Vec3 m(1 / H.xi, 1 / H.xi, 1);
    return (m.asDiagonal() * (H.H[n].transpose() * p)).squaredNorm();
}

namespace {

// d/dx_l of a per-voxel vector field, physical units; one-sided at spatial borders.
template <class Get>
Mat3 jacobian(const GridM2& g, int i, int j, int k, Get get) {
    Mat3 J;  // J(m, l) = d_l V^m
    auto diff = [&](int axis) -> Vec3 {
        const int n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.ntheta;
        const int c = axis == 0 ? i : axis == 1 ? j : k;
        auto at = [&](int cc) {
            if (axis == 2 && g.periodic) cc = g.wrap_k(cc);
            return axis == 0 ? get(g.index(cc, j, k)) : axis == 1 ? get(g.index(i, cc, k)) : get(g.index(i, j, cc));
        };
        const double h = axis == 2 ? g.htheta() : 1.0;
        if (n == 1) return Vec3::Zero();
        if (axis == 2 && g.periodic) return (at(c + 1) - at(c - 1)) / (2 * h);
        if (c == 0) return (at(1) - at(0)) / h;
        if (c == n - 1) return (at(n - 1) - at(n - 2)) / h;
        return (at(c + 1) - at(c - 1)) / (2 * h);
    };
    for (int l = 0; l < 3; ++l) J.col(l) = diff(l);
    return J;
}

}  // namespace

StructureFunctions structure_functions(const FrameM2& frame) {
    const GridM2& g = frame.grid;
    StructureFunctions out{g, std::vector<std::array<double, 27>>(g.size())};
    for (std::size_t n = 0; n < g.size(); ++n) {
        auto [i, j, k] = g.coords(n);
        std::array<Mat3, 3> J;
        for (int a = 0; a < 3; ++a) J[a] = jacobian(g, i, j, k, [&](std::size_t v) { return frame.A[v][a]; });
        auto& c = out.c[n];
        c.fill(0.0);
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                const Vec3 br = J[b] * frame.A[n][a] - J[a] * frame.A[n][b];
                for (int m = 0; m < 3; ++m) {
                    const double v = frame.omega[n][m].dot(br);
                    c[StructureFunctions::slot(a, b, m)] = v;
                    c[StructureFunctions::slot(b, a, m)] = -v;
                }
            }
    }
    return out;
}

StructureFunctions structure_functions_coframe(const FrameM2& frame) {
    const GridM2& g = frame.grid;
    StructureFunctions out{g, std::vector<std::array<double, 27>>(g.size())};
    for (std::size_t n = 0; n < g.size(); ++n) {
        auto [i, j, k] = g.coords(n);
        auto& c = out.c[n];
        c.fill(0.0);
        for (int m = 0; m < 3; ++m) {
            const Mat3 J = jacobian(g, i, j, k, [&](std::size_t v) { return frame.omega[v][m]; });
            const Mat3 dw = J.transpose() - J;  // dw(l, q) = d_l w_q - d_q w_l
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b) {
                    const double v = -frame.A[n][a].dot(dw * frame.A[n][b]);
                    c[StructureFunctions::slot(a, b, m)] = v;
                    c[StructureFunctions::slot(b, a, m)] = -v;
                }
        }
    }
    return out;
}

std::array<double, 27> sample_structure(const StructureFunctions& s, const Vec3& q) {
    Trilinear t = trilinear(s.grid, q);
    std::array<double, 27> out{};
    for (int n = 0; n < 8; ++n) {
        if (t.w[n] == 0.0) continue;
        for (int m = 0; m < 27; ++m) out[m] += t.w[n] * s.c[t.idx[n]][m];
    }
    return out;
}

namespace {

// Three-point derivative on a nonuniform parameter.
template <class T>
T deriv3(double h1, double h2, const T& fm, const T& f0, const T& fp) {
    return (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 + (h1 / (h2 * (h1 + h2))) * fp;
}

}  // namespace

MomentumResidual parallel_momentum_residual(const Geodesic& geo, const GaugeFrameField& gauge,
                                            const StructureFunctions& sf, bool include_metric_gradient) {
    const std::size_t N = geo.points.size();
    require(N >= 3, ErrorKind::Domain, "geodesic shorter than 3 samples");
    require(geo.momentum.size() == N, ErrorKind::Domain, "geodesic carries no momentum");
    const GridM2& g = gauge.grid;
    MomentumResidual out;
    out.stencil = "three-point centered difference on the nonuniform sample parameter";
    out.residual.assign(N, std::nan(""));
    out.relative.assign(N, std::nan(""));
    for (std::size_t n = 1; n + 1 < N; ++n) {
        const double h1 = geo.t[n] - geo.t[n - 1], h2 = geo.t[n + 1] - geo.t[n];
        if (!(h1 > 0 && h2 > 0)) continue;
        const Vec3 dl = deriv3(h1, h2, geo.momentum[n - 1], geo.momentum[n], geo.momentum[n + 1]);
        const Vec3 dp = deriv3(h1, h2, geo.points[n - 1], geo.points[n], geo.points[n + 1]);
        const Vec3 q = g.to_index({geo.points[n][0], geo.points[n][1], geo.points[n][2]});
        FrameSample fs;
        std::array<double, 27> c;
        try {
            fs = sample_frame(gauge, q);
            c = sample_structure(sf, q);
        } catch (const Error&) {
            continue;
        }
        const Vec3& lam = geo.momentum[n];
        Vec3 up;  // lambda^j
        for (int j = 0; j < 3; ++j) up[j] = lam[j] / fs.alpha[j];
        const Vec3 vH = up[0] * fs.A[0] + up[1] * fs.A[1] + up[2] * fs.A[2];
        const double rho = dp.dot(vH) / vH.squaredNorm();
        if (!(std::abs(rho) > 0)) continue;
        Vec3 r = dl / rho;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) r[i] -= c[StructureFunctions::slot(j, i, k)] * lam[k] * up[j];
        if (include_metric_gradient) {
            const double d = 0.25;
            for (int i = 0; i < 3; ++i) {
                try {
                    const Vec3 step = d * fs.A[i];
                    const Vec3 qp = g.to_index(g.from_index(q)) + Vec3(step[0], step[1], step[2] / g.htheta());
                    const Vec3 qm = g.to_index(g.from_index(q)) - Vec3(step[0], step[1], step[2] / g.htheta());
                    const Vec3 ap = sample_frame(gauge, qp).alpha, am = sample_frame(gauge, qm).alpha;
                    for (int j = 0; j < 3; ++j) r[i] += 0.5 * lam[j] * lam[j] * (1 / ap[j] - 1 / am[j]) / (2 * d);
                } catch (const Error&) {
                }
            }
        }
        const double ra = r.cwiseAbs().maxCoeff();
        out.residual[n] = ra;
        double rn = 0, ln = 0;
        for (int i = 0; i < 3; ++i) {
            rn += r[i] * r[i] / fs.alpha[i];
            ln += lam[i] * lam[i] / fs.alpha[i];
        }
        out.relative[n] = std::sqrt(rn / std::max(ln, 1e-300));
        out.max_abs = std::max(out.max_abs, ra);
        out.max_relative = std::max(out.max_relative, out.relative[n]);
    }
    return out;
}

StraightCurve straight_curve(const PointM2& p0, const Vec3& c, const GaugeFrameField& frame, double T, double dt) {
    require(T > 0 && dt > 0, ErrorKind::Config, "T and dt must be positive");
    const GridM2& g = frame.grid;
    auto velocity = [&](const Vec3& p) {
        FrameSample s = sample_frame(frame, g.to_index({p[0], p[1], p[2]}));
        return Vec3(c[0] * s.A[0] + c[1] * s.A[1] + c[2] * s.A[2]);
    };
    StraightCurve out;
    Geodesic& geo = out.curve;
    const int steps = std::max(1, int(std::lround(T / dt)));
    const double h = T / steps;
    Vec3 p(p0.x, p0.y, p0.theta);
    geo.t.push_back(0);
    geo.points.push_back(p);
    for (int s = 0; s < steps; ++s) {
        try {
            const Vec3 k1 = velocity(p);
            const Vec3 k2 = velocity(p + 0.5 * h * k1);
            const Vec3 k3 = velocity(p + 0.5 * h * k2);
            const Vec3 k4 = velocity(p + h * k3);
            p += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            velocity(p);
        } catch (const Error&) {
            geo.truncated = true;
            break;
        }
        geo.t.push_back((s + 1) * h / T);
        geo.points.push_back(p);
    }
    const std::size_t N = geo.points.size();
    for (std::size_t n = 0; n < N; ++n) {
        Vec3 dp;
        if (N == 1)
            dp = velocity(geo.points[0]);
        else if (n == 0)
            dp = (-3 * geo.points[0] + 4 * geo.points[std::min<std::size_t>(1, N - 1)] -
                  geo.points[std::min<std::size_t>(2, N - 1)]) / (2 * h);
        else if (n + 1 == N)
            dp = (3 * geo.points[n] - 4 * geo.points[n - 1] + geo.points[n >= 2 ? n - 2 : 0]) / (2 * h);
        else
            dp = (geo.points[n + 1] - geo.points[n - 1]) / (2 * h);
        if (N == 2) dp = (geo.points[1] - geo.points[0]) / h;
        FrameSample s = sample_frame(frame, g.to_index({geo.points[n][0], geo.points[n][1], geo.points[n][2]}));
        Vec3 comp(s.omega[0].dot(dp), s.omega[1].dot(dp), s.omega[2].dot(dp));
        out.gauge_velocity.push_back(comp);
        out.max_component_drift = std::max(out.max_component_drift, (comp - c).cwiseAbs().maxCoeff());
    }
    geo.length = T;
    return out;
}

}  // namespace otrack
