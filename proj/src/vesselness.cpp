#include "otrack/vesselness.hpp"

#include "otrack/diffgeo.hpp"

#include <algorithm>
#include <cmath>

namespace otrack {

namespace {

double sup_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

LiftedField oriented(const LiftedField& U, bool bright) {
    if (!bright) return U;
    LiftedField out = U;
    for (double& v : out.values) v = -v;
    return out;
}

// 1D lower envelope of f(y) + (x - y)^2 / (4 s) by direct search over the useful window.
void erode_line(const double* in, double* out, int n, std::ptrdiff_t stride, double s, int r) {
    for (int x = 0; x < n; ++x) {
        double m = in[x * stride];
        for (int y = std::max(0, x - r); y <= std::min(n - 1, x + r); ++y)
            m = std::min(m, in[y * stride] + double(x - y) * (x - y) / (4 * s));
        out[x * stride] = m;
    }
}

LiftedField erode_and_sum(const std::vector<LiftedField>& V, double s_e) {
    LiftedField sum(V.front().grid);
    for (const LiftedField& v : V) {
        const LiftedField e = erode_quadratic(v, s_e);
        for (std::size_t n = 0; n < sum.values.size(); ++n) sum.values[n] += e.values[n];
    }
    const double mu = sup_abs(sum.values);
    if (mu > 0)
        for (double& x : sum.values) x /= mu;
    return sum;
}

}  // namespace

void validate(const VesselnessParams& p) {
    require(!p.scales.empty(), ErrorKind::Config, "vesselness needs at least one scale");
    for (double s : p.scales) require(s > 0, ErrorKind::Config, "vesselness scales must be positive");
    require(p.beta >= 0 && p.sigma1 > 0 && p.sigma2_factor > 0 && p.erosion_scale >= 0, ErrorKind::Config,
            "vesselness parameters out of range");
    require(p.lambda_c > 0 && p.p_c > 0, ErrorKind::Config, "cost parameters must be positive");
}

SecondOrderLI left_invariant_second_order(const LiftedField& U, double sigma_s, double sigma_a) {
    const LiftedField Uxx = gaussian_derivative(U, {2, 0, 0}, sigma_s, sigma_a);
    const LiftedField Uxy = gaussian_derivative(U, {1, 1, 0}, sigma_s, sigma_a);
    const LiftedField Uyy = gaussian_derivative(U, {0, 2, 0}, sigma_s, sigma_a);
    const GridM2& g = U.grid;
    SecondOrderLI out{LiftedField(g), LiftedField(g)};
    const std::size_t slice = std::size_t(g.nx) * g.ny;
    for (int k = 0; k < g.ntheta; ++k) {
        const double c = std::cos(g.theta(k)), s = std::sin(g.theta(k));
        for (std::size_t n = k * slice; n < (k + 1) * slice; ++n) {
            out.A11.values[n] = c * c * Uxx.values[n] + 2 * c * s * Uxy.values[n] + s * s * Uyy.values[n];
            out.A22.values[n] = s * s * Uxx.values[n] - 2 * c * s * Uxy.values[n] + c * c * Uyy.values[n];
        }
    }
    return out;
}

LiftedField vesselness_single_scale(const LiftedField& U, double sigma_s, const VesselnessParams& p) {
    validate(p);
    const LiftedField Uo = oriented(U, p.bright_vessels);
    const SecondOrderLI d = left_invariant_second_order(Uo, sigma_s, p.beta * U.grid.htheta());
    const std::size_t N = U.grid.size();
    std::vector<double> S(N);
    for (std::size_t n = 0; n < N; ++n) S[n] = std::hypot(d.A11.values[n], d.A22.values[n]);
    const double sigma2 = p.sigma2_factor * sup_abs(S);
    LiftedField V(U.grid);
    if (!(sigma2 > 0)) return V;
    for (std::size_t n = 0; n < N; ++n) {
        const double Q = d.A22.values[n];
        if (Q <= 0) continue;
        const double R = std::abs(d.A11.values[n]) / std::max(std::abs(Q), 1e-12);
        V.values[n] = std::exp(-R * R / (2 * p.sigma1 * p.sigma1)) *
                      (1 - std::exp(-S[n] * S[n] / (2 * sigma2 * sigma2)));
    }
    return V;
}

LiftedField erode_quadratic(const LiftedField& V, double s_e) {
    if (s_e <= 0) return V;
    const GridM2& g = V.grid;
    double lo = kInf, hi = -kInf;
    for (double v : V.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const int r = int(std::ceil(std::sqrt(4 * s_e * std::max(hi - lo, 0.0))));
    LiftedField tmp(g), out(g);
    for (int k = 0; k < g.ntheta; ++k) {
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t o = g.index(0, j, k);
            erode_line(&V.values[o], &tmp.values[o], g.nx, 1, s_e, r);
        }
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t o = g.index(i, 0, k);
            erode_line(&tmp.values[o], &out.values[o], g.ny, g.nx, s_e, r);
        }
    }
    return out;
}

LiftedField multiscale_vesselness(const LiftedField& U, const VesselnessParams& p) {
    validate(p);
    std::vector<LiftedField> V;
    for (double s : p.scales) V.push_back(vesselness_single_scale(U, s, p));
    return erode_and_sum(V, p.erosion_scale);
}

LiftedField vesselness_cost(const LiftedField& V, const VesselnessParams& p) {
    LiftedField C(V.grid);
    for (std::size_t n = 0; n < C.values.size(); ++n)
        C.values[n] = 1.0 / (1.0 + p.lambda_c * std::pow(std::max(0.0, V.values[n]), p.p_c));
    return C;
}

LiftedField vesselness_multiscale_cost(const std::vector<LiftedField>& U, const VesselnessParams& p) {
    validate(p);
    require(U.size() == p.scales.size(), ErrorKind::Config, "one orientation score per scale is required");
    std::vector<LiftedField> V;
    for (std::size_t l = 0; l < U.size(); ++l) {
        require(U[l].grid.same_shape(U.front().grid), ErrorKind::Config, "orientation scores differ in shape");
        V.push_back(vesselness_single_scale(U[l], p.scales[l], p));
    }
    return vesselness_cost(erode_and_sum(V, p.erosion_scale), p);
}

LiftedField vesselness_multiscale_cost(const LiftedField& U, const VesselnessParams& p) {
    return vesselness_cost(multiscale_vesselness(U, p), p);
}

LiftedField score_cost(const LiftedField& U, double c) {
    require(c >= 0, ErrorKind::Config, "cost contrast must be nonnegative");
    const double m = sup_abs(U.values);
    LiftedField C(U.grid, 1.0);
    if (m == 0) return C;
    for (std::size_t n = 0; n < C.values.size(); ++n) {
        const double u = U.values[n] / m;
        C.values[n] = 1.0 / (1.0 + c * u * u);
    }
    return C;
}

double argmax_orientation(const LiftedField& V, int i, int j) {
    int best = 0;
    for (int k = 1; k < V.grid.ntheta; ++k)
        if (V(i, j, k) > V(i, j, best)) best = k;
    return V.grid.theta(best);
}

}  // namespace otrack
