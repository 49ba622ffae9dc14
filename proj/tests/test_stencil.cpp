#include "helpers.hpp"
#include "otrack/stencil.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace otrack;
using otrack::testing::constant_dual;

namespace {

Mat3 reconstruct(const std::array<SellingTerm, 6>& terms) {
    Mat3 R = Mat3::Zero();
    for (const auto& t : terms) {
        const Vec3 e = t.offset.cast<double>();
        R += t.weight * e * e.transpose();
    }
    return R;
}

double relerr(const Mat3& a, const Mat3& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("identity decomposes on the axes") {
    const auto terms = selling_decompose(Mat3::Identity());
    int ones = 0;
    for (const auto& t : terms) {
        CHECK(t.weight >= 0);
        if (t.weight > 0.5) {
            ++ones;
            CHECK(t.offset.cwiseAbs().sum() == 1);
            CHECK(t.weight == doctest::Approx(1));
        } else {
            CHECK(t.weight == doctest::Approx(0).epsilon(1e-14));
        }
    }
    CHECK(ones == 3);
    CHECK(relerr(reconstruct(terms), Mat3::Identity()) < 1e-14);
}

TEST_CASE("diagonal matrix keeps axis offsets") {
    const Mat3 D = Vec3(1, 2, 3).asDiagonal();
    const auto terms = selling_decompose(D);
    for (const auto& t : terms)
        if (t.weight > 1e-12) {
            CHECK(t.offset.cwiseAbs().sum() == 1);
            int axis = 0;
            while (t.offset[axis] == 0) ++axis;
            CHECK(t.weight == doctest::Approx(D(axis, axis)));
        }
    CHECK(relerr(reconstruct(terms), D) < 1e-14);
}

TEST_CASE("random matrices with anisotropy 10") {
    std::mt19937 rng(11);
    const double bound = 4 * std::sqrt(3.0) * 10;
    for (int n = 0; n < 1000; ++n) {
        const Mat3 D = otrack::testing::random_spd(rng, 10);
        const auto terms = selling_decompose(D);
        for (const auto& t : terms) {
            CHECK(t.weight >= -1e-12 * D.trace());
            if (t.weight > 0) CHECK(t.offset.cast<double>().norm() <= bound);
        }
        CHECK(relerr(reconstruct(terms), D) <= 1e-10);
    }
}

TEST_CASE("half-line decomposition") {
    CHECK(halfline_decompose(Vec3::Zero(), 0.1).empty());
    CHECK_THROWS_AS(halfline_decompose(Vec3(1, 0, 0), 0.0), Error);

    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    for (const Vec3& eta : {Vec3(1, 0, 0), Vec3(0.2, 0, 0), Vec3(0, 0, 3)}) {
        const double eps = 0.1;
        const auto terms = halfline_decompose(eta, eps);
        CHECK(!terms.empty());
        for (const auto& t : terms) {
            CHECK(t.weight > 0);
            CHECK(t.offset.cast<double>().dot(eta) >= 0);
            CHECK(t.offset.cast<double>().norm() <= 4 * std::sqrt(3.0) / eps);
        }
        for (int s = 0; s < 10000; ++s) {
            const Vec3 p(nd(rng), nd(rng), nd(rng));
            double sum = 0;
            for (const auto& t : terms) sum += t.weight * std::pow(std::max(0.0, p.dot(t.offset.cast<double>())), 2);
            const double pe = p.dot(eta), lo = std::pow(std::max(0.0, pe), 2);
            const double hi = lo + eps * eps * (p.squaredNorm() * eta.squaredNorm() - pe * pe);
            const double tol = 1e-12 * (1 + hi);
            REQUIRE(sum >= lo - tol);
            REQUIRE(sum <= hi + tol);
        }
    }
}

TEST_CASE("oblique half-lines keep the sign policy and the upper bound") {
    std::mt19937 rng(9);
    std::normal_distribution<double> nd;
    for (int n = 0; n < 200; ++n) {
        const Vec3 eta = otrack::testing::random_unit(rng) * 2.0;
        const double eps = 0.2;
        const auto terms = halfline_decompose(eta, eps);
        Mat3 M = Mat3::Zero();
        for (const auto& t : terms) {
            CHECK(t.offset.cast<double>().dot(eta) >= 0);
            const Vec3 f = t.offset.cast<double>();
            M += t.weight * f * f.transpose();
        }
        const Mat3 P = eta * eta.transpose();
        CHECK(relerr(M, P + eps * eps * (eta.squaredNorm() * Mat3::Identity() - P)) < 1e-10);
        for (int s = 0; s < 50; ++s) {
            const Vec3 p(nd(rng), nd(rng), nd(rng));
            double sum = 0;
            for (const auto& t : terms) sum += t.weight * std::pow(std::max(0.0, p.dot(t.offset.cast<double>())), 2);
            const double pe = p.dot(eta);
            const double hi = std::pow(std::max(0.0, pe), 2) + eps * eps * (p.squaredNorm() * eta.squaredNorm() - pe * pe);
            CHECK(sum <= hi + 1e-10 * (1 + hi));
        }
    }
}

TEST_CASE("field stencils") {
    GridM2 g(6, 5, 8);

    SUBCASE("isotropic field uses the six neighbors") {
        const StencilField st = build_stencils(constant_dual(g, Mat3::Identity()), 0.1);
        for (const Stencil& s : st.stencils) {
            CHECK(s.nfwd == 0);
            int used = 0;
            for (int t = 0; t < s.nsym; ++t)
                if (s.sym[t].weight > 0) {
                    ++used;
                    CHECK(std::abs(s.sym[t].offset[0]) + std::abs(s.sym[t].offset[1]) + std::abs(s.sym[t].offset[2]) == 1);
                }
            CHECK(used == 3);
        }
    }
    SUBCASE("weights carry the inverse squared cost") {
        const StencilField st = build_stencils(constant_dual(g, Mat3::Identity(), Vec3::Zero(), 2.0), 0.1);
        for (int t = 0; t < st.stencils[0].nsym; ++t)
            if (st.stencils[0].sym[t].weight > 0) CHECK(st.stencils[0].sym[t].weight == doctest::Approx(0.25));
    }
    SUBCASE("radius grows with the inverse relaxation") {
        // Mean of the largest one-sided offset over generic directions.
        std::mt19937 rng(8);
        std::vector<Vec3> dirs;
        for (int n = 0; n < 40; ++n) dirs.push_back(otrack::testing::random_unit(rng));
        std::vector<double> reach;
        for (double eps : {0.2, 0.1, 0.05}) {
            double sum = 0;
            for (const Vec3& eta : dirs) {
                const StencilField st = build_stencils(constant_dual(g, 0.01 * Mat3::Identity(), eta), eps);
                CHECK(st.radius == doctest::Approx(1 / eps));
                CHECK(st.max_offset <= 4 * std::sqrt(3.0) / eps);
                sum += st.max_offset;
            }
            reach.push_back(sum / dirs.size());
        }
        MESSAGE("mean reach " << reach[0] << " " << reach[1] << " " << reach[2]);
        CHECK(reach[1] / reach[0] == doctest::Approx(2).epsilon(0.35));
        CHECK(reach[2] / reach[1] == doctest::Approx(2).epsilon(0.35));
    }
    SUBCASE("deterministic and cacheable") {
        std::mt19937 rng(2);
        DualMetricField d = constant_dual(g, Mat3::Identity());
        for (std::size_t n = 0; n < g.size(); ++n) {
            d.D[n] = otrack::testing::random_spd(rng, 3);
            d.eta[n] = otrack::testing::random_unit(rng) * 0.5;
        }
        const StencilField a = build_stencils(d, 0.2), b = build_stencils(d, 0.2);
        REQUIRE(a.stencils.size() == b.stencils.size());
        for (std::size_t n = 0; n < a.stencils.size(); ++n) {
            CHECK(a.stencils[n].nsym == b.stencils[n].nsym);
            CHECK(a.stencils[n].nfwd == b.stencils[n].nfwd);
            for (int t = 0; t < 6; ++t) {
                CHECK(a.stencils[n].sym[t].weight == b.stencils[n].sym[t].weight);
                CHECK(a.stencils[n].sym[t].offset == b.stencils[n].sym[t].offset);
                CHECK(a.stencils[n].fwd[t].weight == b.stencils[n].fwd[t].weight);
                CHECK(a.stencils[n].fwd[t].offset == b.stencils[n].fwd[t].offset);
            }
        }
        CHECK(a.dual_hash == hash_dual(d));

        const auto path = (std::filesystem::temp_directory_path() / "otrack_stencil_cache.bin").string();
        save_stencil_cache(a, path);
        StencilField c;
        CHECK(load_stencil_cache(path, a.dual_hash, c));
        REQUIRE(c.stencils.size() == a.stencils.size());
        for (std::size_t n = 0; n < a.stencils.size(); ++n)
            for (int t = 0; t < 6; ++t) {
                CHECK(c.stencils[n].sym[t].weight == a.stencils[n].sym[t].weight);
                CHECK(c.stencils[n].fwd[t].offset == a.stencils[n].fwd[t].offset);
            }
        StencilField stale;
        CHECK_FALSE(load_stencil_cache(path, a.dual_hash + 1, stale));
        CHECK_FALSE(load_stencil_cache(path + ".missing", a.dual_hash, stale));
        std::remove(path.c_str());
    }
    SUBCASE("an offset closing on its own voxel is rejected") {
        GridM2 tiny(4, 4, 4);
        // Strong coupling along theta only, with tiny spatial terms, needs a pure theta offset of one period.
        const Mat3 D = Vec3(1e-3, 1e-3, 1.0).asDiagonal();
        DualMetricField d = constant_dual(tiny, D, Vec3(0, 0, 1));
        CHECK_NOTHROW(build_stencils(d, 0.5));
        tiny = GridM2(4, 4, 1);
        d = constant_dual(tiny, D);
        try {
            build_stencils(d, 0.5);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Numerical);
            CHECK(std::string(e.what()).find("voxel") != std::string::npos);
        }
    }
}
