#pragma once

#include "otrack/grid.hpp"

#include <vector>

namespace otrack {

struct VesselnessParams {
    std::vector<double> scales{1.0};   // spatial Gaussian scales sigma_s, pixels
    double beta = 0.75;                // angular scale, in orientation samples
    double sigma1 = 0.5;
    double sigma2_factor = 0.5;        // sigma2 = sigma2_factor * sup |S|
    double erosion_scale = 1.0;        // s_e, pixels^2
    double lambda_c = 1000;
    double p_c = 2;
    bool bright_vessels = false;       // vessels darker than background unless set
};

void validate(const VesselnessParams& p);

// Regularized second-order derivatives along A1 and A2 at scale sigma_s.
struct SecondOrderLI {
    LiftedField A11, A22;
};
SecondOrderLI left_invariant_second_order(const LiftedField& U, double sigma_s, double sigma_a);

LiftedField vesselness_single_scale(const LiftedField& U, double sigma_s, const VesselnessParams& p);

// Morphological erosion in (x, y) with the quadratic structuring function |z|^2 / (4 s_e).
LiftedField erode_quadratic(const LiftedField& V, double s_e);

// Sum over scales of the eroded single-scale vesselness, divided by its sup norm (left as is when zero).
LiftedField multiscale_vesselness(const LiftedField& U, const VesselnessParams& p);

// C = 1 / (1 + lambda_c V^p_c), V normalized.
LiftedField vesselness_cost(const LiftedField& V, const VesselnessParams& p);

// Multi-score form: one orientation score per scale, paired with p.scales.
LiftedField vesselness_multiscale_cost(const std::vector<LiftedField>& U_per_scale, const VesselnessParams& p);
LiftedField vesselness_multiscale_cost(const LiftedField& U, const VesselnessParams& p);

// C = 1 / (1 + c |U / sup|U||^2).
LiftedField score_cost(const LiftedField& U, double c = 200);

// argmax over theta of V at pixel (i, j), in radians.
double argmax_orientation(const LiftedField& V, int i, int j);

}  // namespace otrack
