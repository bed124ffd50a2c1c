#include "xcc/cxp/phantoms.hpp"

#include <algorithm>
#include <cmath>

namespace xcc::inline XCC_PRECISION_NS {

namespace {

void clamp_unit(GrayImage& img) {
    for (Real& v : img.pixels) v = std::clamp(v, Real(0), Real(1));
}

void add_noise(GrayImage& img, double sd, RngStream& rng) {
    for (Real& v : img.pixels) v = static_cast<Real>(v + sd * rng.normal());
}

void add_gaussian(GrayImage& img, double cy, double cx, double sigma, double amp) {
    const double inv = 1.0 / (2 * sigma * sigma);
    for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t c = 0; c < img.width; ++c) {
            const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
            img.at(r, c) = static_cast<Real>(img.at(r, c) + amp * std::exp(-(dy * dy + dx * dx) * inv));
        }
    }
}

}  // namespace

LungPhantom make_lung_phantom(std::size_t size, RngStream& rng) {
    const double n = static_cast<double>(size);
    LungPhantom p{GrayImage(size, size), BinaryMask(size, size)};
    const double body = rng.uniform(0.55, 0.7);
    const double lung = rng.uniform(0.15, 0.3);
    const double cy = n * rng.uniform(0.45, 0.55);
    const double ry = n * rng.uniform(0.25, 0.33);
    const double rx = n * rng.uniform(0.11, 0.16);
    const double gap = n * rng.uniform(0.19, 0.23);
    const double tilt = rng.uniform(-0.15, 0.15);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            const double y = static_cast<double>(r) + 0.5, x = static_cast<double>(c) + 0.5;
            bool inside = false;
            for (int side : {-1, 1}) {
                const double ex = n / 2 + side * gap;
                const double dy = y - cy, dx = x - ex;
                const double u = dx * std::cos(side * tilt) + dy * std::sin(side * tilt);
                const double v = -dx * std::sin(side * tilt) + dy * std::cos(side * tilt);
                if ((u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1) inside = true;
            }
            p.mask.at(r, c) = inside ? 1 : 0;
            const double shade = 0.05 * (y / n - 0.5);
            p.image.at(r, c) = static_cast<Real>((inside ? lung : body) + shade);
        }
    }
    add_noise(p.image, 0.03, rng);
    clamp_unit(p.image);
    return p;
}

RibPair make_rib_pair(std::size_t size, RngStream& rng) {
    const double n = static_cast<double>(size);
    RibPair p{GrayImage(size, size, static_cast<Real>(rng.uniform(0.2, 0.35))), {}};
    for (int k = 0; k < 3; ++k) {
        add_gaussian(p.clean, rng.uniform(0, n), rng.uniform(0, n), n * rng.uniform(0.15, 0.35),
                     rng.uniform(-0.1, 0.2));
    }
    add_noise(p.clean, 0.01, rng);
    clamp_unit(p.clean);

    p.ribbed = p.clean;
    const double amp = rng.uniform(0.15, 0.25);
    const double spacing = n * rng.uniform(0.16, 0.22);
    const double phase = rng.uniform(0, spacing);
    const double bend = rng.uniform(0.5, 1.5) / n;
    const double width = rng.uniform(1.0, 1.6);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            const double x = static_cast<double>(c) - n / 2;
            const double y = static_cast<double>(r) - bend * x * x - phase;
            // distance to the nearest band centre
            const double d = y - spacing * std::round(y / spacing);
            p.ribbed.at(r, c) = static_cast<Real>(p.ribbed.at(r, c) + amp * std::exp(-(d * d) / (2 * width * width)));
        }
    }
    clamp_unit(p.ribbed);
    return p;
}

BlobSample make_blob_sample(const BlobSpec& spec, int label, RngStream& rng) {
    const std::size_t size = spec.size;
    const double n = static_cast<double>(size);
    BlobSample s;
    s.label = label;
    s.image = GrayImage(size, size, static_cast<Real>(rng.uniform(0.0, 0.05)));
    add_gaussian(s.image, n * rng.uniform(0.3, 0.7), n * rng.uniform(0.3, 0.7), n * rng.uniform(0.12, 0.22),
                 rng.uniform(0.15, 0.3));
    add_noise(s.image, spec.noise, rng);
    clamp_unit(s.image);
    s.base = s.image;
    if (label == 1) {
        const std::size_t ph = size / 8 + static_cast<std::size_t>(rng.below(size / 8 + 1));
        const std::size_t pw = size / 8 + static_cast<std::size_t>(rng.below(size / 8 + 1));
        const std::size_t margin = size / 16;
        PatchBox box;
        box.height = ph;
        box.width = pw;
        box.row = margin + static_cast<std::size_t>(rng.below(size - ph - 2 * margin + 1));
        box.col = margin + static_cast<std::size_t>(rng.below(size - pw - 2 * margin + 1));
        const double amp = rng.uniform(0.3, 0.45);
        for (std::size_t r = box.row; r < box.row + ph; ++r) {
            for (std::size_t c = box.col; c < box.col + pw; ++c) {
                s.image.at(r, c) = static_cast<Real>(s.image.at(r, c) + amp);
            }
        }
        clamp_unit(s.image);
        s.box = box;
    }
    return s;
}

}  // namespace xcc::inline XCC_PRECISION_NS
