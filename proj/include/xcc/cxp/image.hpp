#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xcc/tensor/tensor.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Single-channel raster with values in [0, 1], row-major.
struct GrayImage {
    std::size_t height = 0, width = 0;
    std::vector<Real> pixels;

    GrayImage() = default;
    GrayImage(std::size_t h, std::size_t w, Real fill = 0) : height(h), width(w), pixels(h * w, fill) {}

    Real& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
    Real at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
    bool empty() const { return pixels.empty(); }

    /// [1, 1, H, W] tensor copy.
    Tensor to_tensor() const;
    /// Accepts any tensor whose last two axes are H, W and whose leading axes have size 1.
    static GrayImage from_tensor(const Tensor& t);
};

struct BinaryMask {
    std::size_t height = 0, width = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), bits(h * w, fill) {}
    std::uint8_t& at(std::size_t r, std::size_t c) { return bits[r * width + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return bits[r * width + c]; }
    std::size_t count() const;
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
    std::size_t height = 0, width = 0;
    std::vector<std::uint8_t> rgb;
};

/// 8-bit level of a [0,1] value: round(v * 255) after clamping.
std::uint8_t to_level(Real v);

/// Binary PGM (P5, maxval 255). Pixels are scaled by 1/255 on read.
GrayImage decode_pgm(const std::string& bytes);
std::string encode_pgm(const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Binary PPM (P6).
std::string encode_ppm(const RgbImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

/// Whole-file helpers; throw IoError on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// Throws ValueError when a pixel lies outside [0,1] or is not finite.
void check_unit_range(const GrayImage& img, const char* stage);

}  // namespace xcc::inline XCC_PRECISION_NS
