#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mlfe/image.hpp"

namespace mlfe {

/// Reads an 8-bit grayscale PGM (P5/P2) or PNG. Color PNGs are converted to
/// luma with BT.601 weights; 16-bit data is rejected with FormatError.
[[nodiscard]] GrayImage read_image(const std::filesystem::path& path);

/// Writes `img` as 8-bit grayscale, format chosen by extension (.pgm, .png).
/// Samples are clamped to [0, 255] and rounded half away from zero.
void write_image(const GrayImage& img, const std::filesystem::path& path);

/// Quantization used by write_image.
[[nodiscard]] std::uint8_t to_byte(double v) noexcept;

/// Interleaved 8-bit RGB raster.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 * width * height
};

/// Writes an RGB raster as PNG (or binary PPM when the extension is .ppm).
void write_rgb(const RgbImage& img, const std::filesystem::path& path);

}  // namespace mlfe
