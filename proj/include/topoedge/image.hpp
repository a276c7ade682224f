#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace topoedge {

/// Grayscale raster on a uniform grid. Intensities are normalized to [0,1];
/// `h` is the physical spacing of one pixel (defaults to pixel units).
struct Image {
    int width = 0;
    int height = 0;
    double h = 1.0;
    std::vector<double> data;  // row-major, data[y * width + x]

    Image() = default;
    Image(int w, int ht, double spacing = 1.0)
        : width(w), height(ht), h(spacing), data(static_cast<size_t>(w) * ht, 0.0) {}

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads an 8/16-bit PGM (P2 or P5) or a grayscale/RGB PNG. RGB is collapsed
/// to luminance. Sample values are divided by the format maximum.
Image load_image(const std::string& path, double h = 1.0);

/// Writes a binary mask over the element grid as an 8-bit P5 PGM
/// (255 on covered elements, 0 elsewhere).
void save_mask(const std::vector<std::uint8_t>& covered, int width, int height,
               const std::string& path);

/// Clamps to [0,1], quantizes to 8 bit (round half up) and writes a P5 PGM.
void save_field(const std::vector<double>& values, int width, int height,
                const std::string& path);

/// 8-bit P5 writer used by the save_* helpers and the CLI overlay output.
void save_pgm8(const std::vector<std::uint8_t>& bytes, int width, int height,
               const std::string& path);

}  // namespace topoedge
