#include "otrack/metric.hpp"

#include "otrack/diffgeo.hpp"

#include <algorithm>

namespace otrack {

void ModelParams::validate() const {
    require(xi > 0, ErrorKind::Config, "xi must be positive");
    require(zeta > 0, ErrorKind::Config, "zeta must be positive");
    require(epsilon > 0 && epsilon <= 1, ErrorKind::Config, "epsilon must lie in (0, 1]");
    require(lambda_dd >= 0, ErrorKind::Config, "lambda_dd must be nonnegative");
    require(g33 > 0, ErrorKind::Config, "g33 must be positive");
}

Mat3 metric_to_grid(const Mat3& G, double h) {
    const Vec3 s(1, 1, h);
    return s.asDiagonal() * G * s.asDiagonal();
}

Vec3 covector_to_grid(const Vec3& w, double h) { return {w[0], w[1], w[2] * h}; }

Mat3 metric_to_phys(const Mat3& G, double h) {
    const Vec3 s(1, 1, 1 / h);
    return s.asDiagonal() * G * s.asDiagonal();
}

Vec3 covector_to_phys(const Vec3& w, double h) { return {w[0], w[1], w[2] / h}; }

Mat3 base_metric_phys(double theta, double C, const ModelParams& p) {
    const auto w = left_invariant_frame_at(theta);
    const double x2 = p.xi * p.xi;
    Mat3 G = x2 * w[0] * w[0].transpose() + (x2 / (p.zeta * p.zeta)) * w[1] * w[1].transpose() +
             p.g33 * w[2] * w[2].transpose();
    return C * C * G;
}

MetricFieldSym base_metric(const LiftedField& C, const ModelParams& p) {
    p.validate();
    const GridM2& g = C.grid;
    MetricFieldSym out{g, std::vector<Mat3>(g.size()), C.values};
    for (std::size_t n = 0; n < g.size(); ++n) {
        require(C.values[n] > 0, ErrorKind::Config, "cost must be positive");
        out.G[n] = metric_to_grid(base_metric_phys(g.theta(g.coords(n)[2]), C.values[n], p), g.htheta());
    }
    return out;
}

CovectorField base_forward_covector(const LiftedField& C, const ModelParams& p) {
    p.validate();
    const GridM2& g = C.grid;
    CovectorField out{g, std::vector<Vec3>(g.size())};
    const double r = std::sqrt(p.reverse_weight());
    for (std::size_t n = 0; n < g.size(); ++n)
        out.w[n] = covector_to_grid(C.values[n] * r * left_invariant_frame_at(g.theta(g.coords(n)[2]))[0], g.htheta());
    return out;
}

MetricFieldSym data_driven_metric(const MetricFieldSym& base, const HessianField& H, const ModelParams& p) {
    p.validate();
    require(base.grid.same_shape(H.grid), ErrorKind::Config, "Hessian and metric grids differ");
    MetricFieldSym out = base;
    if (p.lambda_dd == 0) return out;
    const double gmax = H.max_norm.empty() ? 0.0 : *std::max_element(H.max_norm.begin(), H.max_norm.end());
    const double tau = 1e-8 * gmax;
    const double h = base.grid.htheta();
    for (std::size_t n = 0; n < out.G.size(); ++n) {
        const double m = H.max_norm[n];
        if (!(m > tau) || m <= 0) continue;
        const double C = base.C[n];
        out.G[n] += (p.lambda_dd * C * C / m) * metric_to_grid(hessian_form(H, n), h);
        out.G[n] = 0.5 * (out.G[n] + out.G[n].transpose()).eval();
    }
    return out;
}

namespace {

// Unit vector of span(basis) closest to target; returns false when target is orthogonal to it.
bool project_unit(const std::vector<Vec3>& basis, const Vec3& target, Vec3& out) {
    Vec3 p = Vec3::Zero();
    for (const Vec3& b : basis) p += b.dot(target) * b;
    if (p.norm() < 1e-8) return false;
    out = p.normalized();
    return true;
}

}  // namespace

GaugeFrameField diagonalize(const MetricFieldSym& Gf) {
    const GridM2& g = Gf.grid;
    const double h = g.htheta();
    const Vec3 S(1, 1, h), Sinv(1, 1, 1 / h);
    GaugeFrameField out;
    out.grid = g;
    out.A.resize(g.size());
    out.omega.resize(g.size());
    out.alpha.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const Mat3& G = Gf.G[n];
        Eigen::SelfAdjointEigenSolver<Mat3> es(G);
        if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigen-decomposition did not converge");
        const Vec3 ev = es.eigenvalues();
        const Mat3 V = es.eigenvectors();
        const double tol = 1e-9 * std::max(std::abs(ev[2]), 1e-300);
        const auto base = left_invariant_frame_at(g.theta(g.coords(n)[2]));
        // Base co-frame in grid units, normalized.
        const Vec3 b1 = covector_to_grid(base[0], h).normalized();
        const Vec3 b2 = covector_to_grid(base[1], h).normalized();
        const Vec3 b3(0, 0, 1);

        Vec3 v1 = V.col(0);
        if (ev[1] - ev[0] <= tol) {
            std::vector<Vec3> span{V.col(0), V.col(1)};
            if (ev[2] - ev[0] <= tol) span.push_back(V.col(2));
            project_unit(span, b1, v1);
        }
        // Orthonormal basis of the complement, then the 2x2 restriction of G on it.
        Vec3 r1 = (std::abs(v1[2]) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0)).cross(v1).normalized();
        Vec3 r2 = v1.cross(r1);
        Eigen::Matrix2d R;
        R << r1.dot(G * r1), r1.dot(G * r2), r2.dot(G * r1), r2.dot(G * r2);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(R);
        const Eigen::Vector2d ev2 = es2.eigenvalues();
        Vec3 v3;
        if (ev2[1] - ev2[0] <= tol) {
            if (!project_unit({r1, r2}, b3, v3)) {
                Vec3 v2;
                if (!project_unit({r1, r2}, b2, v2)) v2 = r1;
                v3 = v1.cross(v2);
            }
        } else {
            Vec3 c0 = es2.eigenvectors()(0, 0) * r1 + es2.eigenvectors()(1, 0) * r2;
            Vec3 c1 = es2.eigenvectors()(0, 1) * r1 + es2.eigenvectors()(1, 1) * r2;
            v3 = std::abs(c1[2]) >= std::abs(c0[2]) ? c1 : c0;
        }
        if (v1.dot(Sinv.asDiagonal() * b1) < 0) v1 = -v1;
        if (v3[2] < 0) v3 = -v3;
        Vec3 v2 = v3.cross(v1);
        std::array<Vec3, 3> v{v1.normalized(), v2.normalized(), v3.normalized()};
        for (int i = 0; i < 3; ++i) {
            const Vec3 w = Sinv.asDiagonal() * v[i];
            const double nrm = w.norm();
            out.omega[n][i] = w / nrm;
            out.A[n][i] = nrm * (S.asDiagonal() * v[i]);
            out.alpha[n][i] = v[i].dot(G * v[i]) * nrm * nrm;
        }
    }
    return out;
}

CovectorField gauge_forward_covector(const GaugeFrameField& frame, const ModelParams& p) {
    p.validate();
    const GridM2& g = frame.grid;
    CovectorField out{g, std::vector<Vec3>(g.size())};
    const double r = std::sqrt(1.0 / (p.epsilon * p.epsilon) - 1.0);
    for (std::size_t n = 0; n < g.size(); ++n)
        out.w[n] = covector_to_grid(r * std::sqrt(frame.alpha[n][0]) * frame.omega[n][0], g.htheta());
    return out;
}

Image2D crossing_weight(int nx, int ny, const std::vector<std::array<double, 2>>& crossings, double a, double sigma) {
    Image2D k(nx, ny, 0.0);
    if (crossings.empty()) return k;
    const int pad = sigma > 0 ? int(std::ceil(4 * sigma)) : 0;
    const int W = nx + 2 * pad, H = ny + 2 * pad;
    std::vector<double> ind(std::size_t(W) * H, 0.0), tmp(ind.size(), 0.0);
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) {
            const double x = i - pad, y = j - pad;
            for (const auto& c : crossings)
                if (std::abs(x - c[0]) <= a && std::abs(y - c[1]) <= a) {
                    ind[std::size_t(j) * W + i] = 1.0;
                    break;
                }
        }
    if (pad > 0) {
        std::vector<double> ker(2 * pad + 1);
        double sum = 0;
        for (int d = -pad; d <= pad; ++d) sum += ker[d + pad] = std::exp(-0.5 * d * d / (sigma * sigma));
        for (double& v : ker) v /= sum;
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i) {
                double s = 0;
                for (int d = -pad; d <= pad; ++d) {
                    const int ii = i + d;
                    if (ii >= 0 && ii < W) s += ker[d + pad] * ind[std::size_t(j) * W + ii];
                }
                tmp[std::size_t(j) * W + i] = s;
            }
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i) {
                double s = 0;
                for (int d = -pad; d <= pad; ++d) {
                    const int jj = j + d;
                    if (jj >= 0 && jj < H) s += ker[d + pad] * tmp[std::size_t(jj) * W + i];
                }
                ind[std::size_t(j) * W + i] = s;
            }
    }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) k(i, j) = std::clamp(ind[std::size_t(j + pad) * W + i + pad], 0.0, 1.0);
    return k;
}

MetricFieldSym mixed_metric(const MetricFieldSym& G_LI, const MetricFieldSym& G_DD, const Image2D& kappa) {
    require(G_LI.grid.same_shape(G_DD.grid), ErrorKind::Config, "metric grids differ");
    require(kappa.nx == G_LI.grid.nx && kappa.ny == G_LI.grid.ny, ErrorKind::Config, "crossing weight size mismatch");
    MetricFieldSym out = G_DD;
    for (std::size_t n = 0; n < out.G.size(); ++n) {
        auto [i, j, k] = out.grid.coords(n);
        const double c = kappa(i, j);
        out.G[n] = c * G_LI.G[n] + (1 - c) * G_DD.G[n];
    }
    return out;
}

CovectorField mixed_covector(const CovectorField& w_LI, const CovectorField& w_DD, const Image2D& kappa) {
    require(w_LI.grid.same_shape(w_DD.grid), ErrorKind::Config, "covector grids differ");
    CovectorField out = w_DD;
    for (std::size_t n = 0; n < out.w.size(); ++n) {
        auto [i, j, k] = out.grid.coords(n);
        const double c = kappa(i, j);
        out.w[n] = std::sqrt(c) * w_LI.w[n] + std::sqrt(1 - c) * w_DD.w[n];
    }
    return out;
}

DualCoefficients dual_local(const Mat3& M, const Vec3& w) {
    Eigen::LDLT<Mat3> ldlt(M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) fail(ErrorKind::Numerical, "metric is not positive definite");
    const Vec3 Mw = ldlt.solve(w);
    DualCoefficients d;
    d.D = (M + w * w.transpose()).inverse();
    d.D = 0.5 * (d.D + d.D.transpose()).eval();
    d.eta = Mw / std::sqrt(1.0 + w.dot(Mw));
    return d;
}

double finsler_norm(const Mat3& M, const Vec3& w, const Vec3& v) {
    const double neg = std::min(0.0, w.dot(v));
    return std::sqrt(std::max(0.0, v.dot(M * v)) + neg * neg);
}

double dual_norm(const Mat3& D, const Vec3& eta, const Vec3& p) {
    const double pos = std::max(0.0, eta.dot(p));
    return std::sqrt(std::max(0.0, p.dot(D * p)) + pos * pos);
}

DualMetricField dual_coefficients(const MetricFieldSym& G, const CovectorField& w_fwd) {
    require(G.grid.same_shape(w_fwd.grid), ErrorKind::Config, "metric and covector grids differ");
    DualMetricField out{G.grid, std::vector<Mat3>(G.G.size()), std::vector<Vec3>(G.G.size()), G.C};
    for (std::size_t n = 0; n < G.G.size(); ++n) {
        const double C = G.C[n];
        require(C > 0, ErrorKind::Numerical, "cost must be positive");
        DualCoefficients d = dual_local(G.G[n] / (C * C), w_fwd.w[n] / C);
        out.D[n] = d.D;
        out.eta[n] = d.eta;
    }
    return out;
}

}  // namespace otrack
