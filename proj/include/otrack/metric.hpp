#pragma once

#include "otrack/frame.hpp"
#include "otrack/grid.hpp"

#include <array>
#include <vector>

namespace otrack {

struct HessianField;

struct ModelParams {
    double xi = 0.1;        // sqrt(g11)
    double zeta = 0.1;      // spatial anisotropy, g22 = xi^2 / zeta^2
    double epsilon = 0.1;   // reverse-gear relaxation in (0, 1]
    double lambda_dd = 50;  // data-adaptation weight
    double g33 = 1;

    void validate() const;
    // Weight of the one-sided term: C^2 (eps^-2 - 1) xi^2 <omega^1, p>_-^2.
    double reverse_weight() const { return (1.0 / (epsilon * epsilon) - 1.0) * xi * xi; }
};

// Symmetric metric in grid units (theta components scaled by htheta), C^2 included.
struct MetricFieldSym {
    GridM2 grid;
    std::vector<Mat3> G;
    std::vector<double> C;
};

// Covector field in grid units.
struct CovectorField {
    GridM2 grid;
    std::vector<Vec3> w;
};

// Cost-free dual coefficients in grid units: F*(p)^2 = C^-2 (<p, D p> + <p, eta>_+^2).
struct DualMetricField {
    GridM2 grid;
    std::vector<Mat3> D;
    std::vector<Vec3> eta;
    std::vector<double> C;
};

// S G S and S w with S = diag(1, 1, htheta).
Mat3 metric_to_grid(const Mat3& G_phys, double htheta);
Vec3 covector_to_grid(const Vec3& w_phys, double htheta);
Mat3 metric_to_phys(const Mat3& G_grid, double htheta);
Vec3 covector_to_phys(const Vec3& w_grid, double htheta);

// Physical base metric at one orientation with cost C.
Mat3 base_metric_phys(double theta, double C, const ModelParams& p);

MetricFieldSym base_metric(const LiftedField& C, const ModelParams& p);
CovectorField base_forward_covector(const LiftedField& C, const ModelParams& p);

// Adds lambda_dd C^2 N with N the normalized Hessian quadratic form; N = 0 where the maximum is below tau_H.
MetricFieldSym data_driven_metric(const MetricFieldSym& base, const HessianField& H, const ModelParams& p);

// Eigen-decomposition with the labeling and sign policy of the gauge co-frame.
GaugeFrameField diagonalize(const MetricFieldSym& G);

// sqrt(eps^-2 - 1) sqrt(alpha_1) omega_U^1, in grid units.
CovectorField gauge_forward_covector(const GaugeFrameField& frame, const ModelParams& p);

// Smoothed indicator of boxes [c - a, c + a]^2, clamped to [0, 1].
Image2D crossing_weight(int nx, int ny, const std::vector<std::array<double, 2>>& crossings, double a, double sigma);

MetricFieldSym mixed_metric(const MetricFieldSym& G_LI, const MetricFieldSym& G_DD, const Image2D& kappa);
CovectorField mixed_covector(const CovectorField& w_LI, const CovectorField& w_DD, const Image2D& kappa);

struct DualCoefficients {
    Mat3 D;
    Vec3 eta;
};

// Exact dual of sqrt(<v, M v> + <w, v>_-^2).
DualCoefficients dual_local(const Mat3& M, const Vec3& w);
double finsler_norm(const Mat3& M, const Vec3& w, const Vec3& v);
double dual_norm(const Mat3& D, const Vec3& eta, const Vec3& p);

DualMetricField dual_coefficients(const MetricFieldSym& G, const CovectorField& w_fwd);

}  // namespace otrack
