#include "helpers.hpp"
#include "otrack/eikonal.hpp"
#include "otrack/metric.hpp"

#include <doctest.h>

#include <random>

using namespace otrack;
using otrack::testing::constant_dual;

namespace {

GridM2 flat_grid(int n) {
    GridM2 g(n, n, n);
    g.periodic = false;
    return g;
}

}  // namespace

TEST_CASE("local solver") {
    std::vector<std::pair<double, double>> one{{1.0, 0.0}};
    CHECK(solve_update(one) == doctest::Approx(1));
    std::vector<std::pair<double, double>> two{{1.0, 0.0}, {1.0, 0.0}};
    CHECK(solve_update(two) == doctest::Approx(1 / std::sqrt(2.0)));
    std::vector<std::pair<double, double>> none{{1.0, kInf}, {0.0, 3.0}};
    CHECK(solve_update(none) == kInf);
    // A neighbor far above the root does not take part.
    std::vector<std::pair<double, double>> high{{1.0, 0.0}, {1.0, 50.0}};
    CHECK(solve_update(high) == doctest::Approx(1));
}

TEST_CASE("local solver causality and monotonicity") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 2000; ++trial) {
        const int m = 1 + int(u(rng) * 6);
        std::vector<std::pair<double, double>> t;
        for (int n = 0; n < m; ++n) t.push_back({0.1 + 2 * u(rng), 3 * u(rng)});
        auto copy = t;
        const double w = solve_update(copy);
        REQUIRE(std::isfinite(w));
        // Equation holds with exactly the neighbors below the root.
        double sum = 0, vmin = kInf;
        for (auto [a, v] : t) {
            sum += a * std::pow(std::max(0.0, w - v), 2);
            vmin = std::min(vmin, v);
        }
        CHECK(sum == doctest::Approx(1).epsilon(1e-10));
        CHECK(w > vmin);
        // Brute force over active subsets: the smallest consistent root.
        double best = kInf;
        for (int mask = 1; mask < (1 << m); ++mask) {
            double A = 0, B = 0, Cc = -1, vmax = -kInf;
            for (int n = 0; n < m; ++n)
                if (mask >> n & 1) {
                    A += t[n].first;
                    B += t[n].first * t[n].second;
                    Cc += t[n].first * t[n].second * t[n].second;
                    vmax = std::max(vmax, t[n].second);
                }
            const double disc = B * B - A * Cc;
            if (disc < 0) continue;
            const double r = (B + std::sqrt(disc)) / A;
            bool ok = r >= vmax;
            for (int n = 0; n < m; ++n)
                if (!(mask >> n & 1) && t[n].second < r) ok = false;
            if (ok) best = std::min(best, r);
        }
        CHECK(w == doctest::Approx(best).epsilon(1e-10));
        // Raising any neighbor never lowers the update.
        for (int n = 0; n < m; ++n) {
            auto up = t;
            up[n].second += u(rng);
            CHECK(solve_update(up) >= w - 1e-12);
        }
    }
}

TEST_CASE("isotropic distance from a point") {
    const int n = 41;
    const GridM2 g = flat_grid(n);
    const StencilField st = build_stencils(constant_dual(g, Mat3::Identity()), 0.5);
    SourceSet src;
    src.add(g, 20, 20, 20);
    const DistanceMap dm = fast_march(src, st);
    double worst = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double r = std::sqrt(double((i - 20) * (i - 20) + (j - 20) * (j - 20) + (k - 20) * (k - 20)));
                if (r < 5 || r > 20) continue;
                worst = std::max(worst, std::abs(dm.W(i, j, k) - r));
            }
    MESSAGE("max absolute error " << worst);
    CHECK(worst <= 2.0);
    CHECK(dm.accepted == g.size());
    CHECK(scheme_residual(st, dm) <= 1e-6);
}

TEST_CASE("several sources give the pointwise minimum") {
    GridM2 g(20, 16, 16);
    std::mt19937 rng(5);
    DualMetricField d = constant_dual(g, Mat3::Identity());
    for (std::size_t n = 0; n < g.size(); ++n) d.D[n] = otrack::testing::random_spd(rng, 2);
    const StencilField st = build_stencils(d, 0.5);
    SourceSet a, b, ab;
    a.add(g, 3, 4, 2);
    b.add(g, 15, 11, 9);
    ab.add(g, 3, 4, 2);
    ab.add(g, 15, 11, 9);
    const DistanceMap da = fast_march(a, st), db = fast_march(b, st), dab = fast_march(ab, st);
    // A voxel is pure when every stencil neighbor accepted before it is pure and closer to the same source.
    // Pure voxels never combine the two fronts, so there the joint run must reproduce the minimum exactly;
    // elsewhere a stencil reading both fronts may only improve on it.
    std::vector<std::size_t> by_order(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) by_order[std::size_t(dab.order[n])] = n;
    std::vector<char> pure(g.size(), 0);
    std::size_t npure = 0;
    for (std::size_t n : by_order) {
        const bool label = da.W.values[n] <= db.W.values[n];
        bool ok = true;
        const auto [i, j, k] = g.coords(n);
        auto visit = [&](const std::array<std::int16_t, 3>& o, int sign) {
            const int a = i + sign * o[0], b = j + sign * o[1];
            if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) return;
            const std::size_t m = g.index(a, b, g.wrap_k(k + sign * o[2]));
            if (dab.order[m] < dab.order[n] && (!pure[m] || (da.W.values[m] <= db.W.values[m]) != label)) ok = false;
        };
        const Stencil& sn = st.stencils[n];
        for (int e = 0; e < sn.nsym; ++e) {
            visit(sn.sym[e].offset, 1);
            visit(sn.sym[e].offset, -1);
        }
        for (int f = 0; f < sn.nfwd; ++f) visit(sn.fwd[f].offset, -1);
        pure[n] = ok;
        npure += ok;
    }
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double m = std::min(da.W.values[n], db.W.values[n]);
        if (pure[n]) CHECK(dab.W.values[n] == m);
        CHECK(dab.W.values[n] <= m * (1 + 1e-14));
    }
    MESSAGE(npure << " of " << g.size() << " voxels never combine the two fronts");
    CHECK(npure > g.size() / 2);
    std::size_t checked = 0;
    CHECK(scheme_residual(st, dab, &checked) <= 1e-6);
    CHECK(checked > g.size() / 2);
}

TEST_CASE("acceptance follows increasing values") {
    GridM2 g(16, 16, 8);
    const StencilField st = build_stencils(constant_dual(g, Vec3(1, 2, 0.5).asDiagonal()), 0.5);
    SourceSet s;
    s.add(g, {7.2, 8.9, 1.0});
    const DistanceMap dm = fast_march(s, st);
    std::vector<std::pair<std::int64_t, double>> seq;
    for (std::size_t n = 0; n < g.size(); ++n) seq.push_back({dm.order[n], dm.W.values[n]});
    std::sort(seq.begin(), seq.end());
    for (std::size_t n = 1; n < seq.size(); ++n) CHECK(seq[n].second >= seq[n - 1].second);
    const LiftedField of = acceptance_order_field(dm);
    CHECK(of.values[dm.sources[0]] == 0);
}

TEST_CASE("forward-only propagation along a tube") {
    GridM2 g(41, 11, 16);
    LiftedField C(g, 1.0);
    for (int k = 0; k < 16; ++k)
        for (int i = 0; i < 41; ++i)
            for (int j = 4; j <= 6; ++j) C(i, j, k) = 0.1;
    ModelParams p;
    const DualMetricField d = dual_coefficients(base_metric(C, p), base_forward_covector(C, p));
    const StencilField st = build_stencils(d, p.epsilon);
    SourceSet s;
    s.add(g, 20, 5, 0);
    const DistanceMap dm = fast_march(s, st);
    std::int64_t back = std::numeric_limits<std::int64_t>::max();
    for (int k = 0; k < 16; ++k) back = std::min(back, dm.order[g.index(2, 5, k)]);
    const std::int64_t fwd = dm.order[g.index(38, 5, 0)];
    MESSAGE("forward end order " << fwd << ", backward end order " << back);
    CHECK(fwd >= 0);
    CHECK(fwd < back);
    CHECK(dm.W(38, 5, 0) < 0.5 * dm.W(2, 5, 0));
    CHECK(scheme_residual(st, dm) <= 1e-6);
}

TEST_CASE("early stopping") {
    GridM2 g(30, 30, 8);
    const StencilField st = build_stencils(constant_dual(g, Mat3::Identity()), 0.5);
    SourceSet s;
    s.add(g, 2, 2, 0);
    MarchOptions opt;
    opt.stop_at = {g.index(6, 6, 0)};
    const DistanceMap part = fast_march(s, st, opt);
    CHECK(part.state[g.index(6, 6, 0)] == VoxelState::Accepted);
    CHECK(part.accepted < g.size());
    CHECK(part.state[g.index(29, 29, 4)] != VoxelState::Accepted);
    const DistanceMap full = fast_march(s, st);
    for (std::size_t n = 0; n < g.size(); ++n)
        if (part.state[n] == VoxelState::Accepted) CHECK(part.W.values[n] == full.W.values[n]);
    MarchOptions cap;
    cap.value_cap = 5;
    const DistanceMap capped = fast_march(s, st, cap);
    for (std::size_t n = 0; n < g.size(); ++n)
        if (capped.state[n] == VoxelState::Accepted) CHECK(capped.W.values[n] <= 5 + 1.0);
}

TEST_CASE("invalid sources") {
    GridM2 g(8, 8, 8);
    const StencilField st = build_stencils(constant_dual(g, Mat3::Identity()), 0.5);
    CHECK_THROWS_AS(fast_march(SourceSet{}, st), Error);
    SourceSet out;
    CHECK_THROWS_AS(out.add(g, {9.5, 2, 0}), Error);
    CHECK_THROWS_AS(out.add(g, 3, -1, 0), Error);
}
