#include "otrack/stencil.hpp"

#include "otrack/metric.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace otrack {

namespace {

// Complementary pair (k, l) of each pair (i, j) in a superbase of four vectors.
constexpr std::array<std::array<int, 4>, 6> kPairs{{
    {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}, {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}}};

double dot(const Vec3i& a, const Mat3& D, const Vec3i& b) { return a.cast<double>().dot(D * b.cast<double>()); }

}  // namespace

std::array<SellingTerm, 6> selling_decompose(const Mat3& D) {
    std::array<Vec3i, 4> b{Vec3i(1, 0, 0), Vec3i(0, 1, 0), Vec3i(0, 0, 1), Vec3i(-1, -1, -1)};
    const double tol = 1e-12 * D.trace();
    int iter = 0;
    for (;; ++iter) {
        if (iter > 1000) fail(ErrorKind::Numerical, "Selling reduction exceeded 1000 iterations (ill-conditioned matrix)");
        bool obtuse = true;
        for (const auto& pr : kPairs) {
            const int i = pr[0], j = pr[1], k = pr[2], l = pr[3];
            if (dot(b[i], D, b[j]) > tol) {
                b[k] += b[i];
                b[l] += b[i];
                b[i] = -b[i];
                obtuse = false;
                break;
            }
        }
        if (obtuse) break;
    }
    std::array<SellingTerm, 6> out;
    for (int n = 0; n < 6; ++n) {
        const auto& pr = kPairs[n];
        double w = -dot(b[pr[0]], D, b[pr[1]]);
        out[n] = {std::max(w, 0.0), b[pr[2]].cross(b[pr[3]])};
    }
    return out;
}

std::vector<SellingTerm> halfline_decompose(const Vec3& eta, double eps_rel) {
    require(eps_rel > 0 && eps_rel < 1, ErrorKind::Config, "relative relaxation must lie in (0, 1)");
    std::vector<SellingTerm> out;
    const double n2 = eta.squaredNorm();
    if (n2 == 0.0) return out;
    Mat3 P = eta * eta.transpose();
    Mat3 M = P + eps_rel * eps_rel * (n2 * Mat3::Identity() - P);
    for (SellingTerm t : selling_decompose(M)) {
        if (t.weight <= 0.0) continue;
        if (t.offset.cast<double>().dot(eta) < 0) t.offset = -t.offset;
        out.push_back(t);
    }
    return out;
}

double anisotropy(const Mat3& D) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(D, Eigen::EigenvaluesOnly);
    const Vec3 ev = es.eigenvalues();
    return std::sqrt(ev[2] / ev[0]);
}

std::uint64_t hash_dual(const DualMetricField& dual) {
    // FNV-1a over the grid shape and every coefficient.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 1099511628211ull;
        }
    };
    const GridM2& g = dual.grid;
    int dims[4] = {g.nx, g.ny, g.ntheta, g.periodic ? 1 : 0};
    mix(dims, sizeof(dims));
    for (std::size_t n = 0; n < g.size(); ++n) {
        mix(dual.D[n].data(), 9 * sizeof(double));
        mix(dual.eta[n].data(), 3 * sizeof(double));
        mix(&dual.C[n], sizeof(double));
    }
    return h;
}

StencilField build_stencils(const DualMetricField& dual, double eps_rel) {
    const GridM2& g = dual.grid;
    StencilField out;
    out.grid = g;
    out.stencils.resize(g.size());
    out.radius = 1.0 / eps_rel;
    auto pack = [&](const SellingTerm& t, double scale, std::size_t n) {
        // Offsets longer than the period are fine on the covering space, but not when they close on the voxel.
        if (g.periodic && t.weight > 0 && t.offset[0] == 0 && t.offset[1] == 0 && t.offset[2] % g.ntheta == 0) {
            auto [i, j, k] = g.coords(n);
            std::ostringstream os;
            os << "stencil offset (" << t.offset.transpose() << ") at voxel (" << i << ", " << j << ", " << k
               << ") wraps onto itself; increase ntheta or the relaxation";
            fail(ErrorKind::Numerical, os.str());
        }
        for (int c = 0; c < 3; ++c)
            if (std::abs(t.offset[c]) > 30000) fail(ErrorKind::Numerical, "stencil offset overflow");
        out.max_offset = std::max(out.max_offset, t.offset.cast<double>().norm());
        return StencilTerm{t.weight * scale,
                           {std::int16_t(t.offset[0]), std::int16_t(t.offset[1]), std::int16_t(t.offset[2])}};
    };
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double scale = 1.0 / (dual.C[n] * dual.C[n]);
        Stencil& s = out.stencils[n];
        try {
            out.radius = std::max(out.radius, anisotropy(dual.D[n]));
            for (const SellingTerm& t : selling_decompose(dual.D[n]))
                if (t.weight > 0) s.sym[s.nsym++] = pack(t, scale, n);
            for (const SellingTerm& t : halfline_decompose(dual.eta[n], eps_rel)) s.fwd[s.nfwd++] = pack(t, scale, n);
        } catch (const Error& e) {
            auto [i, j, k] = g.coords(n);
            std::ostringstream os;
            os << e.what() << " [voxel " << i << ", " << j << ", " << k << "]";
            throw Error(e.kind(), os.str());
        }
    }
    out.dual_hash = hash_dual(dual);
    return out;
}

namespace {
constexpr char kCacheMagic[8] = {'O', 'T', 'S', 'T', 'C', 'L', '0', '1'};
}

void save_stencil_cache(const StencilField& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IO, "cannot open " + path);
    out.write(kCacheMagic, 8);
    const GridM2& g = s.grid;
    std::int32_t dims[4] = {g.nx, g.ny, g.ntheta, g.periodic ? 1 : 0};
    out.write(reinterpret_cast<const char*>(&s.dual_hash), sizeof(s.dual_hash));
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    double radii[4] = {s.radius, s.max_offset, g.x0, g.y0};
    out.write(reinterpret_cast<const char*>(radii), sizeof(radii));
    for (const Stencil& st : s.stencils) {
        out.put(char(st.nsym));
        out.put(char(st.nfwd));
        auto put = [&](const StencilTerm& t) {
            out.write(reinterpret_cast<const char*>(&t.weight), sizeof(double));
            out.write(reinterpret_cast<const char*>(t.offset.data()), 3 * sizeof(std::int16_t));
        };
        for (int n = 0; n < st.nsym; ++n) put(st.sym[n]);
        for (int n = 0; n < st.nfwd; ++n) put(st.fwd[n]);
    }
    if (!out) fail(ErrorKind::IO, "failed writing " + path);
}

bool load_stencil_cache(const std::string& path, std::uint64_t expected_hash, StencilField& result) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return false;
    StencilField s;
    std::int32_t dims[4];
    double radii[4];
    in.read(reinterpret_cast<char*>(&s.dual_hash), sizeof(s.dual_hash));
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    in.read(reinterpret_cast<char*>(radii), sizeof(radii));
    if (!in || s.dual_hash != expected_hash) return false;
    s.grid = GridM2(dims[0], dims[1], dims[2], radii[2], radii[3]);
    s.grid.periodic = dims[3] != 0;
    s.radius = radii[0];
    s.max_offset = radii[1];
    s.stencils.resize(s.grid.size());
    for (Stencil& st : s.stencils) {
        int ns = in.get(), nf = in.get();
        if (!in || ns > 6 || nf > 6) return false;
        st.nsym = std::uint8_t(ns);
        st.nfwd = std::uint8_t(nf);
        auto get = [&](StencilTerm& t) {
            in.read(reinterpret_cast<char*>(&t.weight), sizeof(double));
            in.read(reinterpret_cast<char*>(t.offset.data()), 3 * sizeof(std::int16_t));
        };
        for (int n = 0; n < ns; ++n) get(st.sym[n]);
        for (int n = 0; n < nf; ++n) get(st.fwd[n]);
    }
    if (!in) return false;
    result = std::move(s);
    return true;
}

}  // namespace otrack
