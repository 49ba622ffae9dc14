#pragma once

#include "otrack/common.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace otrack {

// Point of M2 in pixels and radians.
struct PointM2 {
    double x = 0, y = 0, theta = 0;

    PointM2 canonical() const;
};

double wrap_angle(double theta);  // representative in [0, 2pi)

// Tangent vectors and covectors are component triples in the fixed (x, y, theta) frame.
using TangentM2 = Vec3;
using CovectorM2 = Vec3;

// Sampling of R^2 x S^1. Voxel (i, j, k) sits at (x0 + i, y0 + j, k * htheta), x fastest.
// Image rows map to +y. `periodic` is false only for flat validation lattices.
struct GridM2 {
    int nx = 0, ny = 0, ntheta = 0;
    double x0 = 0, y0 = 0;
    bool periodic = true;

    GridM2() = default;
    GridM2(int nx_, int ny_, int ntheta_, double x0_ = 0, double y0_ = 0);

    double htheta() const { return kTwoPi / ntheta; }
    std::size_t size() const { return std::size_t(nx) * ny * ntheta; }
    std::size_t index(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(nx) * (std::size_t(j) + std::size_t(ny) * std::size_t(k));
    }
    std::array<int, 3> coords(std::size_t idx) const {
        int i = int(idx % nx);
        std::size_t r = idx / nx;
        return {i, int(r % ny), int(r / ny)};
    }
    int wrap_k(int k) const { return ((k % ntheta) + ntheta) % ntheta; }
    double theta(int k) const { return k * htheta(); }

    // Continuous index coordinates (i, j, k); k is not wrapped.
    Vec3 to_index(const PointM2& p) const { return {p.x - x0, p.y - y0, p.theta / htheta()}; }
    PointM2 from_index(const Vec3& q) const { return {x0 + q[0], y0 + q[1], q[2] * htheta()}; }

    // Diagonal map from grid-unit tangents to physical tangents: diag(1, 1, htheta).
    Vec3 scale() const { return {1.0, 1.0, htheta()}; }

    bool same_shape(const GridM2& o) const {
        return nx == o.nx && ny == o.ny && ntheta == o.ntheta && periodic == o.periodic;
    }
};

struct LiftedField {
    GridM2 grid;
    std::vector<double> values;

    LiftedField() = default;
    explicit LiftedField(const GridM2& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& operator()(int i, int j, int k) { return values[grid.index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
};

// Row j is y. Values are real, typically in [0, 1].
struct Image2D {
    int nx = 0, ny = 0;
    std::vector<double> values;

    Image2D() = default;
    Image2D(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), values(std::size_t(nx_) * ny_, fill) {}

    double& operator()(int i, int j) { return values[std::size_t(j) * nx + i]; }
    double operator()(int i, int j) const { return values[std::size_t(j) * nx + i]; }
};

// Eight corner weights of a trilinear interpolation.
struct Trilinear {
    std::array<std::size_t, 8> idx{};
    std::array<double, 8> w{};
};

// Throws a domain error when the spatial part of q lies outside the grid.
Trilinear trilinear(const GridM2& g, const Vec3& q);

// Derivatives of the trilinear weights with respect to the three index coordinates.
struct TrilinearGradient {
    std::array<std::size_t, 8> idx{};
    std::array<Vec3, 8> dw{};
};
TrilinearGradient trilinear_gradient(const GridM2& g, const Vec3& q);

double interpolate(const LiftedField& f, const PointM2& p);
double interpolate_index(const LiftedField& f, const Vec3& q);

// (d/dx, d/dy, d/dtheta) by central differences, one-sided at spatial borders.
CovectorM2 gradient_fixed(const LiftedField& f, int i, int j, int k);

}  // namespace otrack
