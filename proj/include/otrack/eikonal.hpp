#pragma once

#include "otrack/grid.hpp"
#include "otrack/stencil.hpp"

#include <cstdint>
#include <vector>

namespace otrack {

enum class VoxelState : std::uint8_t { Far, Trial, Accepted };

struct DistanceMap {
    LiftedField W;                       // +inf where not reached
    std::vector<VoxelState> state;
    std::vector<std::int64_t> order;     // acceptance index, -1 when never accepted
    std::vector<std::size_t> sources;
    std::size_t accepted = 0;
};

struct SourceSet {
    std::vector<std::size_t> voxels;

    void add(const GridM2& g, int i, int j, int k);
    // Nearest voxel of a continuous point.
    void add(const GridM2& g, const PointM2& p);
};

struct MarchOptions {
    std::vector<std::size_t> stop_at;   // stop once all of these are accepted
    double value_cap = kInf;            // stop once the smallest trial value exceeds this
};

// Largest root of sum a_k (w - v_k)_+^2 = 1; +inf when no finite v_k.
double solve_update(std::vector<std::pair<double, double>>& terms);

// Candidate value at voxel n from the given neighbor values (non-accepted neighbors read as +inf).
double local_update(std::size_t n, const StencilField& st, const DistanceMap& dm);

// Reverse adjacency in compressed-row form: voxels whose stencil reads voxel n.
struct ReverseAdjacency {
    std::vector<std::uint32_t> start;
    std::vector<std::uint32_t> targets;
};

ReverseAdjacency build_reverse_adjacency(const StencilField& st);

class FastMarcher {
public:
    explicit FastMarcher(const StencilField& st);
    DistanceMap run(const SourceSet& sources, const MarchOptions& opt = {}) const;
    const StencilField& stencils() const { return st_; }

private:
    const StencilField& st_;
    ReverseAdjacency rev_;
};

DistanceMap fast_march(const SourceSet& sources, const StencilField& st, const MarchOptions& opt = {});

// Scheme value F W(n) from final values; NaN when a stencil neighbor is outside or not accepted.
double scheme_value(std::size_t n, const StencilField& st, const DistanceMap& dm);

// max |F W - 1| over accepted non-source voxels with a fully accepted in-domain stencil.
double scheme_residual(const StencilField& st, const DistanceMap& dm, std::size_t* checked = nullptr);

// Acceptance order as a field (-1 where never accepted).
LiftedField acceptance_order_field(const DistanceMap& dm);

}  // namespace otrack
