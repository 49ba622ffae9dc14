#pragma once

#include "otrack/curve.hpp"
#include "otrack/frame.hpp"
#include "otrack/grid.hpp"

#include <array>
#include <string>
#include <vector>

namespace otrack {

// Separable Gaussian smoothing truncated at 4 sigma; spatial borders replicate, theta is periodic.
LiftedField gaussian_smooth(const LiftedField& U, double sigma_s, double sigma_a);

// Derivative of multi-index (ox, oy, otheta), total order <= 2, in physical units.
LiftedField gaussian_derivative(const LiftedField& U, std::array<int, 3> order, double sigma_s, double sigma_a);

struct HessianField {
    GridM2 grid;
    double xi = 0.1;
    std::vector<Mat3> H;            // rows/columns in (x, y, theta)
    std::vector<double> max_norm;   // top eigenvalue of H M_xi^2 H^T
};

HessianField hessian_field(const LiftedField& U, double xi, double sigma_s_ext, double sigma_a_ext);

// ||M_xi H^T p||^2
double dual_norm_sq(const HessianField& H, std::size_t voxel, const TangentM2& p);

// H M_xi^2 H^T, the quadratic form of dual_norm_sq.
Mat3 hessian_form(const HessianField& H, std::size_t voxel);

// c[i][j][k] = <omega^k, [A_i, A_j]>, zero-based indices.
struct StructureFunctions {
    GridM2 grid;
    std::vector<std::array<double, 27>> c;

    static int slot(int i, int j, int k) { return 9 * i + 3 * j + k; }
    double operator()(std::size_t voxel, int i, int j, int k) const { return c[voxel][slot(i, j, k)]; }
};

StructureFunctions structure_functions(const FrameM2& frame);

// Same quantity through the co-frame: c_ij^k = -d omega^k(A_i, A_j).
StructureFunctions structure_functions_coframe(const FrameM2& frame);

// Trilinear sample of the structure functions at a continuous grid-index point.
std::array<double, 27> sample_structure(const StructureFunctions& s, const Vec3& q);

struct MomentumResidual {
    std::vector<double> residual;   // max_i |r_i| per sample, NaN at the two ends
    std::vector<double> relative;   // |r|_* / |lambda|_*, with |l|_*^2 = sum l_i^2 / alpha_i
    double max_abs = 0;
    double max_relative = 0;
    std::string stencil;
};

// r_i = d lambda_i / ds - sum c_ji^k lambda_k lambda^j along the curve, with s the Hamiltonian time
// recovered from the sampled velocity. When include_metric_gradient is set, the term
// -1/2 sum_j lambda_j^2 A_i(1/alpha_j) of the full canonical system is added.
MomentumResidual parallel_momentum_residual(const Geodesic& g, const GaugeFrameField& gauge,
                                            const StructureFunctions& s, bool include_metric_gradient = false);

struct StraightCurve {
    Geodesic curve;                     // t normalized by T
    std::vector<Vec3> gauge_velocity;   // omega^i(gamma') recovered along the result
    double max_component_drift = 0;
};

// RK4 of gamma' = sum c^i A_i. Stops with curve.truncated when leaving the spatial grid.
StraightCurve straight_curve(const PointM2& p0, const Vec3& c, const GaugeFrameField& frame, double T, double dt);

}  // namespace otrack
