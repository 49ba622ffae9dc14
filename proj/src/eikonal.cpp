#include "otrack/eikonal.hpp"

#include <algorithm>
#include <queue>

namespace otrack {

namespace {

constexpr std::size_t kNone = std::size_t(-1);

// Voxel n + sign * offset, or kNone outside the grid.
inline std::size_t shift(const GridM2& g, std::size_t n, const std::array<std::int16_t, 3>& off, int sign) {
    auto [i, j, k] = g.coords(n);
    i += sign * off[0];
    j += sign * off[1];
    k += sign * off[2];
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return kNone;
    if (g.periodic)
        k = g.wrap_k(k);
    else if (k < 0 || k >= g.ntheta)
        return kNone;
    return g.index(i, j, k);
}

struct Term {
    double a, v;
};

// Largest root over the active set of sorted terms.
double solve_sorted(Term* t, int m) {
    std::sort(t, t + m, [](const Term& x, const Term& y) { return x.v < y.v; });
    double x = kInf, A = 0, B = 0, Cc = 0;
    for (int n = 0; n < m; ++n) {
        if (!(t[n].v < x)) break;
        A += t[n].a;
        B += t[n].a * t[n].v;
        Cc += t[n].a * t[n].v * t[n].v;
        const double disc = B * B - A * (Cc - 1.0);
        x = (B + std::sqrt(std::max(disc, 0.0))) / A;
    }
    return x;
}

// Gathers (weight, neighbor value) pairs; `reader` maps a voxel to its value or +inf.
template <class Reader>
int gather(std::size_t n, const StencilField& st, Reader reader, Term* t, bool* complete) {
    const GridM2& g = st.grid;
    const Stencil& s = st.stencils[n];
    int m = 0;
    for (int e = 0; e < s.nsym; ++e) {
        const std::size_t a = shift(g, n, s.sym[e].offset, 1), b = shift(g, n, s.sym[e].offset, -1);
        if (complete && (a == kNone || b == kNone)) *complete = false;
        const double va = a == kNone ? kInf : reader(a), vb = b == kNone ? kInf : reader(b);
        if (complete && !(std::isfinite(va) && std::isfinite(vb))) *complete = false;
        const double v = std::min(va, vb);
        if (std::isfinite(v) && s.sym[e].weight > 0) t[m++] = {s.sym[e].weight, v};
    }
    for (int f = 0; f < s.nfwd; ++f) {
        const std::size_t a = shift(g, n, s.fwd[f].offset, -1);
        if (complete && a == kNone) *complete = false;
        const double v = a == kNone ? kInf : reader(a);
        if (complete && !std::isfinite(v)) *complete = false;
        if (std::isfinite(v) && s.fwd[f].weight > 0) t[m++] = {s.fwd[f].weight, v};
    }
    return m;
}

}  // namespace

void SourceSet::add(const GridM2& g, int i, int j, int k) {
    require(i >= 0 && j >= 0 && i < g.nx && j < g.ny, ErrorKind::Domain, "source outside the grid");
    if (g.periodic) k = g.wrap_k(k);
    require(k >= 0 && k < g.ntheta, ErrorKind::Domain, "source outside the grid");
    voxels.push_back(g.index(i, j, k));
}

void SourceSet::add(const GridM2& g, const PointM2& p) {
    const Vec3 q = g.to_index(p);
    add(g, int(std::lround(q[0])), int(std::lround(q[1])), int(std::lround(q[2])));
}

double solve_update(std::vector<std::pair<double, double>>& terms) {
    std::vector<Term> t;
    for (auto [a, v] : terms)
        if (a > 0 && std::isfinite(v)) t.push_back({a, v});
    return t.empty() ? kInf : solve_sorted(t.data(), int(t.size()));
}

double local_update(std::size_t n, const StencilField& st, const DistanceMap& dm) {
    Term t[12];
    const int m = gather(
        n, st, [&](std::size_t v) { return dm.state[v] == VoxelState::Accepted ? dm.W.values[v] : kInf; }, t, nullptr);
    return m == 0 ? kInf : solve_sorted(t, m);
}

ReverseAdjacency build_reverse_adjacency(const StencilField& st) {
    const GridM2& g = st.grid;
    require(g.size() < std::size_t(1) << 32, ErrorKind::Config, "grid too large for 32-bit adjacency");
    ReverseAdjacency r;
    r.start.assign(g.size() + 1, 0);
    auto visit = [&](auto&& emit) {
        for (std::size_t n = 0; n < g.size(); ++n) {
            const Stencil& s = st.stencils[n];
            for (int e = 0; e < s.nsym; ++e)
                for (int sign : {1, -1}) {
                    const std::size_t m = shift(g, n, s.sym[e].offset, sign);
                    if (m != kNone) emit(m, n);
                }
            for (int f = 0; f < s.nfwd; ++f) {
                const std::size_t m = shift(g, n, s.fwd[f].offset, -1);
                if (m != kNone) emit(m, n);
            }
        }
    };
    visit([&](std::size_t m, std::size_t) { ++r.start[m + 1]; });
    for (std::size_t n = 0; n < g.size(); ++n) r.start[n + 1] += r.start[n];
    r.targets.resize(r.start.back());
    std::vector<std::uint32_t> fill(r.start.begin(), r.start.end() - 1);
    visit([&](std::size_t m, std::size_t n) { r.targets[fill[m]++] = std::uint32_t(n); });
    return r;
}

FastMarcher::FastMarcher(const StencilField& st) : st_(st), rev_(build_reverse_adjacency(st)) {}

DistanceMap FastMarcher::run(const SourceSet& sources, const MarchOptions& opt) const {
    const GridM2& g = st_.grid;
    require(!sources.voxels.empty(), ErrorKind::Config, "empty source set");
    DistanceMap dm;
    dm.W = LiftedField(g, kInf);
    dm.state.assign(g.size(), VoxelState::Far);
    dm.order.assign(g.size(), -1);
    dm.sources = sources.voxels;

    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    for (std::size_t s : sources.voxels) {
        require(s < g.size(), ErrorKind::Domain, "source outside the grid");
        dm.W.values[s] = 0.0;
        dm.state[s] = VoxelState::Trial;
        heap.push({0.0, std::uint32_t(s)});
    }
    std::vector<char> stop(opt.stop_at.empty() ? 0 : g.size(), 0);
    std::size_t remaining = 0;
    for (std::size_t s : opt.stop_at) {
        require(s < g.size(), ErrorKind::Domain, "stop voxel outside the grid");
        if (!stop[s]) ++remaining;
        stop[s] = 1;
    }
    Term t[12];
    while (!heap.empty()) {
        auto [w, n] = heap.top();
        heap.pop();
        if (dm.state[n] == VoxelState::Accepted || w != dm.W.values[n]) continue;
        if (w > opt.value_cap) break;
        dm.state[n] = VoxelState::Accepted;
        dm.order[n] = std::int64_t(dm.accepted++);
        if (!stop.empty() && stop[n] && --remaining == 0) break;
        for (std::uint32_t r = rev_.start[n]; r < rev_.start[n + 1]; ++r) {
            const std::uint32_t q = rev_.targets[r];
            if (dm.state[q] == VoxelState::Accepted) continue;
            const int m = gather(
                q, st_, [&](std::size_t v) { return dm.state[v] == VoxelState::Accepted ? dm.W.values[v] : kInf; }, t,
                nullptr);
            if (m == 0) continue;
            const double v = solve_sorted(t, m);
            if (v < dm.W.values[q]) {
                dm.W.values[q] = v;
                dm.state[q] = VoxelState::Trial;
                heap.push({v, q});
            }
        }
    }
    return dm;
}

DistanceMap fast_march(const SourceSet& sources, const StencilField& st, const MarchOptions& opt) {
    return FastMarcher(st).run(sources, opt);
}

double scheme_value(std::size_t n, const StencilField& st, const DistanceMap& dm) {
    Term t[12];
    bool complete = true;
    const int m = gather(
        n, st, [&](std::size_t v) { return dm.state[v] == VoxelState::Accepted ? dm.W.values[v] : kInf; }, t,
        &complete);
    if (!complete) return std::nan("");
    const double w = dm.W.values[n];
    double s = 0;
    for (int k = 0; k < m; ++k) {
        const double d = std::max(0.0, w - t[k].v);
        s += t[k].a * d * d;
    }
    return s;
}

double scheme_residual(const StencilField& st, const DistanceMap& dm, std::size_t* checked) {
    std::vector<char> is_source(st.grid.size(), 0);
    for (std::size_t s : dm.sources) is_source[s] = 1;
    double worst = 0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < st.grid.size(); ++n) {
        if (dm.state[n] != VoxelState::Accepted || is_source[n]) continue;
        const double v = scheme_value(n, st, dm);
        if (std::isnan(v)) continue;
        worst = std::max(worst, std::abs(v - 1.0));
        ++count;
    }
    if (checked) *checked = count;
    return worst;
}

LiftedField acceptance_order_field(const DistanceMap& dm) {
    LiftedField f(dm.W.grid);
    for (std::size_t n = 0; n < f.values.size(); ++n) f.values[n] = double(dm.order[n]);
    return f;
}

}  // namespace otrack
