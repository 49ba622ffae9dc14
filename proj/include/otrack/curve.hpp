#pragma once

#include "otrack/common.hpp"

#include <array>
#include <string>
#include <vector>

namespace otrack {

using Polyline = std::vector<std::array<double, 2>>;

// Polyline of (x, y, theta) points with theta unwrapped, and optional gauge momentum per point.
struct Geodesic {
    std::vector<double> t;
    std::vector<Vec3> points;
    std::vector<Vec3> momentum;
    double length = 0;
    bool truncated = false;
};

std::vector<std::array<double, 2>> spatial_projection(const Geodesic& g);

// Symmetric Hausdorff distance between the spatial projections, with segments densified to 0.1 px.
double hausdorff_spatial(const Geodesic& a, const Geodesic& b);

// Columns t, x, y, theta, then lambda1..3 when momentum is present.
void save_geodesic_csv(const Geodesic& g, const std::string& path);
Geodesic load_geodesic_csv(const std::string& path);

}  // namespace otrack
