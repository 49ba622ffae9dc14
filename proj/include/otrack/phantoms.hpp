#pragma once

#include "otrack/curve.hpp"
#include "otrack/grid.hpp"

#include <vector>

namespace otrack {

struct Phantom {
    Image2D image;                      // bright background 1, dark vessels
    Image2D mask;                       // 1 inside the tube of radius `radius`
    std::vector<Polyline> centerlines;
    std::vector<double> radii;          // per centerline
    std::vector<PointM2> seeds, tips, bifurcations;   // theta along the vessel, pointing away from the seed
};

// Dark Gaussian-profile tubes (std = radius / 2) of depth `contrast` around the given centerlines.
Phantom render_tubes(int nx, int ny, const std::vector<Polyline>& lines, const std::vector<double>& radii,
                     double contrast = 0.5);

Phantom straight_tube(int nx, int ny, std::array<double, 2> a, std::array<double, 2> b, double radius = 2.0);

// S-shaped vessel running bottom to top; tips[0] is the upper end, seeds[0] the lower end.
Phantom s_curve(int n, double radius = 2.0);

// Trunk from the seed up to a bifurcation, then two curved branches to the tips.
Phantom y_tree(int n, double trunk_radius = 2.5, double branch_radius = 2.0);

double distance_to_polyline(const Polyline& line, double x, double y);

// Counter-clockwise quarter turn: pixel (i, j) moves to (ny - 1 - j, i).
Image2D rotate90(const Image2D& img);
PointM2 rotate90(const PointM2& p, int ny);

void add_noise(Image2D& img, double sigma, unsigned seed);

}  // namespace otrack
