#pragma once

#include "otrack/grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace otrack {

// 8/16-bit grayscale PNG or PGM (P2/P5), normalized to [0, 1].
Image2D load_image(const std::string& path);

// Grayscale export; values are clamped to [0, 1] and stored with the given bit depth.
void save_image(const Image2D& img, const std::string& path, int bit_depth = 8);

struct RGBImage {
    int nx = 0, ny = 0;
    std::vector<std::array<std::uint8_t, 3>> px;

    RGBImage(int nx_, int ny_) : nx(nx_), ny(ny_), px(std::size_t(nx_) * ny_) {}
    std::array<std::uint8_t, 3>& at(int i, int j) { return px[std::size_t(j) * nx + i]; }
};

void save_rgb(const RGBImage& img, const std::string& path);

struct Marker {
    double x, y;
    std::array<std::uint8_t, 3> color;
};

inline constexpr std::array<std::uint8_t, 3> kSeedColor{0, 200, 0};
inline constexpr std::array<std::uint8_t, 3> kBifurcationColor{160, 32, 240};
inline constexpr std::array<std::uint8_t, 3> kTipColor{230, 0, 0};

// Polylines are spatial (x, y) paths in pixels; each gets a color from a fixed palette.
void save_overlay(const Image2D& img, const std::vector<std::vector<std::array<double, 2>>>& polylines,
                  const std::vector<Marker>& markers, const std::string& path);

// Raw little-endian float32 dump behind a plain-text header.
void save_field(const LiftedField& f, const std::string& path);
LiftedField load_field(const std::string& path);

// Pixel sets of straight segments between consecutive points (Bresenham), no duplicates.
std::vector<std::array<int, 2>> rasterize_polyline(const std::vector<std::array<double, 2>>& pts);

}  // namespace otrack
