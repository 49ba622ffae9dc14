#pragma once

#include "otrack/grid.hpp"

#include <vector>

namespace otrack {

struct CakeParams {
    double rho_max = 0.45;      // radial cutoff, cycles per pixel
    double rho_flat = 0.5;      // fraction of rho_max where the raised-cosine roll-off starts
    int spline_order = 3;       // angular B-spline order
    bool remove_dc = true;
};

// Real parts of nθ rotated cake wavelets, each K x K, x fastest, centered at (K/2, K/2).
// Kernel k responds to lines whose tangent points along k * htheta.
struct WaveletBank {
    int ntheta = 0;
    int K = 0;
    CakeParams params;
    std::vector<std::vector<double>> kernels;

    double at(int k, int i, int j) const { return kernels[k][std::size_t(j) * K + i]; }
};

// Centered cardinal B-spline of the given order (support [-(n+1)/2, (n+1)/2]).
double bspline(int order, double x);

// Angular window of orientation k at polar frequency angle phi; the nθ windows sum to 1.
double cake_angular_window(int k, int ntheta, int order, double phi);

// Raised-cosine radial low-pass at radial frequency rho (cycles per pixel).
double cake_radial_window(double rho, const CakeParams& p);

WaveletBank build_cake_bank(int ntheta, int K = 15, const CakeParams& p = {});

// U(., ., theta_k) = f correlated with kernel k, via FFT on a reflectively padded image.
LiftedField orientation_score(const Image2D& f, const WaveletBank& bank);

// Sum over k of U_k convolved with kernel k, divided by sum_k |kernel_k^|^2 where that exceeds
// rel_floor times its maximum; frequencies below the floor are dropped.
Image2D reconstruct_approx(const LiftedField& U, const WaveletBank& bank, double rel_floor = 1e-3);

// f restricted to the band where the bank's normalization exceeds rel_floor times its maximum.
Image2D band_pass(const Image2D& f, const WaveletBank& bank, double rel_floor = 1e-3);

double relative_l2(const Image2D& a, const Image2D& ref);

}  // namespace otrack
