#pragma once

#include "otrack/curve.hpp"
#include "otrack/diffgeo.hpp"
#include "otrack/eikonal.hpp"
#include "otrack/frame.hpp"
#include "otrack/metric.hpp"

#include <vector>

namespace otrack {

struct BacktrackOptions {
    double step = 0.2;                          // spatial step in grid units per RK2 stage
    double snap_radius = 1.0;                   // grid units
    std::size_t max_steps = 200000;
    const GaugeFrameField* gauge = nullptr;     // records gauge momentum when set
};

// Steepest descent of W: gamma' = -dF*(gamma, dW) with RK2; samples run from p to the nearest source.
Geodesic backtrack(const PointM2& p, const DistanceMap& W, const DualMetricField& dual,
                   const BacktrackOptions& opt = {});

// Upwind geodesic flow of the scheme at an accepted voxel: sum of weight * (W(x) - W(y))_+ * (y - x)
// over the active stencil neighbors y, in grid units. Zero at sources and unaccepted voxels.
Vec3 upwind_flow(const StencilField& st, const DistanceMap& W, std::size_t voxel);

// Descent along the trilinearly interpolated, per-voxel normalized upwind flow. This route reads the
// same differences as the scheme, so it stays stable where W is steep across thin structures.
Geodesic backtrack_flow(const PointM2& p, const DistanceMap& W, const StencilField& st,
                        const BacktrackOptions& opt = {});

// Gauge-frame route: gamma'^k proportional to (A_k W) / alpha_k, positive part on k = 1 when forward_only.
Geodesic backtrack_gauge(const PointM2& p, const DistanceMap& W, const GaugeFrameField& gauge, bool forward_only,
                         const BacktrackOptions& opt = {});

struct ShootResult {
    Geodesic curve;                    // t normalized by T, momentum in gauge components
    std::vector<double> hamiltonian;   // 1/2 sum lambda_i^2 / alpha_i per sample
};

// RK4 of gamma'^i = lambda^i and the canonical momentum equations. With include_metric_gradient the
// term -1/2 sum_j lambda_j^2 A_i(1/alpha_j) is kept, which makes the Hamiltonian an exact invariant
// when the alpha_i vary. The initial momentum is rescaled to Hamiltonian 1/2 when normalize is set.
ShootResult shoot_hamiltonian(const PointM2& p0, const Vec3& lambda0, const GaugeFrameField& gauge,
                              const StructureFunctions& s, double T, double dt, bool include_metric_gradient = true,
                              bool normalize = true);

// Gauge components <dW, A_i> at a point, from interpolated central differences of W.
Vec3 gauge_momentum(const DistanceMap& W, const GaugeFrameField& gauge, const PointM2& p);

// Grid-unit gradient of W at a continuous index point.
Vec3 distance_gradient(const DistanceMap& W, const Vec3& q);
double distance_value(const DistanceMap& W, const Vec3& q);

// Sum of F over segments, with the metric at segment midpoints. Backtracked samples are traversed
// from the source toward the start, hence travel_reversed.
double finsler_length(const Geodesic& g, const MetricFieldSym& G, const CovectorField& w, bool travel_reversed = true);

}  // namespace otrack
