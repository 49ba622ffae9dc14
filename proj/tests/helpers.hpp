#pragma once

#include "otrack/eikonal.hpp"
#include "otrack/metric.hpp"
#include "otrack/stencil.hpp"

#include <random>

namespace otrack::testing {

// SPD matrix with eigenvalues in [1, mu^2] (so anisotropy <= mu) and a random orientation.
inline Mat3 random_spd(std::mt19937& rng, double mu) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n;
    Mat3 A;
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = n(rng);
    Eigen::HouseholderQR<Mat3> qr(A);
    const Mat3 Q = qr.householderQ();
    Vec3 ev(1.0, std::pow(mu * mu, u(rng)), mu * mu);
    return Q * ev.asDiagonal() * Q.transpose();
}

inline Vec3 random_unit(std::mt19937& rng) {
    std::normal_distribution<double> n;
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

// Dual field with the same coefficients at every voxel.
inline DualMetricField constant_dual(const GridM2& g, const Mat3& D, const Vec3& eta = Vec3::Zero(), double C = 1) {
    DualMetricField f;
    f.grid = g;
    f.D.assign(g.size(), D);
    f.eta.assign(g.size(), eta);
    f.C.assign(g.size(), C);
    return f;
}

}  // namespace otrack::testing
