#include "xcc/cxp/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace xcc::inline XCC_PRECISION_NS {

Tensor GrayImage::to_tensor() const {
    return Tensor(Shape{1, 1, height, width}, pixels);
}

GrayImage GrayImage::from_tensor(const Tensor& t) {
    if (t.rank() < 2) throw ShapeError("image tensor needs [.., H, W]");
    const std::size_t h = t.dim(t.rank() - 2), w = t.dim(t.rank() - 1);
    if (t.numel() != h * w) throw ShapeError("image tensor has extra leading extent: " + shape_str(t.shape()));
    GrayImage img(h, w);
    std::copy(t.data().begin(), t.data().end(), img.pixels.begin());
    return img;
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::uint8_t to_level(Real v) {
    const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

namespace {

// Reads the next whitespace-separated header token, skipping # comments.
std::string next_token(const std::string& s, std::size_t& pos) {
    for (;;) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return s.substr(start, pos - start);
}

std::size_t parse_dim(const std::string& tok, const char* what) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw IoError(std::string("PGM: bad ") + what + " '" + tok + "'");
    }
    const unsigned long v = std::stoul(tok);
    if (v == 0 || v > 65535) throw IoError(std::string("PGM: ") + what + " out of range");
    return v;
}

}  // namespace

GrayImage decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    if (next_token(bytes, pos) != "P5") throw IoError("PGM: missing P5 magic");
    const std::size_t w = parse_dim(next_token(bytes, pos), "width");
    const std::size_t h = parse_dim(next_token(bytes, pos), "height");
    const std::size_t maxval = parse_dim(next_token(bytes, pos), "maxval");
    if (maxval != 255) throw IoError("PGM: only 8-bit (maxval 255) images are supported");
    ++pos;  // single whitespace byte before the raster
    if (bytes.size() < pos + w * h) throw IoError("PGM: truncated raster");
    GrayImage img(h, w);
    for (std::size_t i = 0; i < w * h; ++i) {
        img.pixels[i] = static_cast<Real>(static_cast<unsigned char>(bytes[pos + i])) / Real(255);
    }
    return img;
}

std::string encode_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out[header + i] = static_cast<char>(to_level(img.pixels[i]));
    return out;
}

std::string encode_ppm(const RgbImage& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(img.rgb.begin(), img.rgb.end());
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
    try {
        return decode_pgm(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) { write_file(path, encode_pgm(img)); }
void write_ppm(const std::filesystem::path& path, const RgbImage& img) { write_file(path, encode_ppm(img)); }

void check_unit_range(const GrayImage& img, const char* stage) {
    for (Real v : img.pixels) {
        if (!(v >= 0 && v <= 1)) throw ValueError(std::string(stage) + ": pixel outside [0,1]");
    }
}

}  // namespace xcc::inline XCC_PRECISION_NS
