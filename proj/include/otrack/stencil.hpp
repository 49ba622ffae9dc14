#pragma once

#include "otrack/common.hpp"
#include "otrack/grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace otrack {

struct DualMetricField;

struct SellingTerm {
    double weight;
    Vec3i offset;
};

// Six terms with sum weight * e e^T = D. Throws a numerical error past 1000 exchanges.
std::array<SellingTerm, 6> selling_decompose(const Mat3& D);

// Nonzero terms sandwiching <p, eta>_+^2; offsets satisfy <f, eta> >= 0.
std::vector<SellingTerm> halfline_decompose(const Vec3& eta, double eps_rel);

// sqrt(|D| |D^-1|), the anisotropy ratio.
double anisotropy(const Mat3& D);

struct StencilTerm {
    double weight = 0;
    std::array<std::int16_t, 3> offset{};
};

// Symmetric part uses +-e, one-sided part uses -f. Weights carry the C^-2 factor.
struct Stencil {
    std::array<StencilTerm, 6> sym{};
    std::array<StencilTerm, 6> fwd{};
    std::uint8_t nsym = 0, nfwd = 0;
};

struct StencilField {
    GridM2 grid;
    std::vector<Stencil> stencils;
    double radius = 0;       // max{mu(D), 1/eps_rel}
    double max_offset = 0;   // largest offset norm actually used
    std::uint64_t dual_hash = 0;
};

StencilField build_stencils(const DualMetricField& dual, double eps_rel);

std::uint64_t hash_dual(const DualMetricField& dual);

// Binary cache keyed by the dual-field hash; load returns false on a missing or stale file.
void save_stencil_cache(const StencilField& s, const std::string& path);
bool load_stencil_cache(const std::string& path, std::uint64_t expected_hash, StencilField& out);

}  // namespace otrack
