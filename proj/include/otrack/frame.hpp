#pragma once

#include "otrack/grid.hpp"

#include <array>
#include <vector>

namespace otrack {

// Per-voxel frame A_i and co-frame omega^i in physical fixed coordinates (x, y, theta).
struct FrameM2 {
    GridM2 grid;
    std::vector<std::array<Vec3, 3>> A;
    std::vector<std::array<Vec3, 3>> omega;
};

// Frame diagonalizing a metric: G = sum alpha_i omega^i (omega^i)^T in physical coordinates.
struct GaugeFrameField : FrameM2 {
    std::vector<Vec3> alpha;
};

// A1 = (cos, sin, 0), A2 = (-sin, cos, 0), A3 = (0, 0, 1); the co-frame has the same components.
std::array<Vec3, 3> left_invariant_frame_at(double theta);
FrameM2 left_invariant_frame(const GridM2& g);

// Rows A1, A2, A3 at theta: maps fixed components to left-invariant ones. It only mixes x and y, so it
// commutes with the grid-unit scaling of theta.
Mat3 left_invariant_rotation(double theta);

// Frame vectors and co-vectors at a continuous grid-index point (trilinear, not re-orthonormalized).
struct FrameSample {
    std::array<Vec3, 3> A, omega;
    Vec3 alpha;
};
FrameSample sample_frame(const GaugeFrameField& f, const Vec3& q);

}  // namespace otrack
