#include "xcc/explain/cam.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xcc/cxp/resize.hpp"

namespace xcc::inline XCC_PRECISION_NS {

const char* cam_method_name(CamMethod m) {
    switch (m) {
        case CamMethod::grad_cam: return "grad-cam";
        case CamMethod::grad_cam_pp: return "grad-cam++";
        case CamMethod::score_cam: return "score-cam";
    }
    return "?";
}

CamMethod parse_cam_method(const std::string& s) {
    if (s == "grad-cam") return CamMethod::grad_cam;
    if (s == "grad-cam++") return CamMethod::grad_cam_pp;
    if (s == "score-cam") return CamMethod::score_cam;
    throw ValueError("unknown CAM method '" + s + "'");
}

std::size_t CamMap::argmax() const {
    return static_cast<std::size_t>(std::max_element(grid.begin(), grid.end()) - grid.begin());
}

std::pair<double, double> CamMap::argmax_in_image(std::size_t img_h, std::size_t img_w) const {
    const std::size_t k = argmax();
    const double r = (static_cast<double>(k / width) + 0.5) * static_cast<double>(img_h) / static_cast<double>(height);
    const double c = (static_cast<double>(k % width) + 0.5) * static_cast<double>(img_w) / static_cast<double>(width);
    return {r, c};
}

std::vector<double> cam_weights(const std::vector<double>& a, const std::vector<double>& g, std::size_t channels,
                                CamMethod method, bool zero_higher_order) {
    if (channels == 0 || a.size() != g.size() || a.size() % channels != 0) throw ShapeError("cam_weights: bad sizes");
    const std::size_t hw = a.size() / channels;
    std::vector<double> w(channels, 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
        const double* ac = a.data() + c * hw;
        const double* gc = g.data() + c * hw;
        if (method == CamMethod::grad_cam) {
            for (std::size_t k = 0; k < hw; ++k) w[c] += gc[k];
            w[c] /= static_cast<double>(hw);
            continue;
        }
        double sum_a = 0;
        for (std::size_t k = 0; k < hw; ++k) sum_a += ac[k];
        for (std::size_t k = 0; k < hw; ++k) {
            const double g2 = gc[k] * gc[k];
            const double den = zero_higher_order ? 2 * g2 : 2 * g2 + sum_a * g2 * gc[k];
            const double alpha = den != 0 ? g2 / den : 0.0;
            w[c] += alpha * std::max(gc[k], 0.0);
        }
    }
    return w;
}

std::vector<double> weighted_map(const std::vector<double>& a, const std::vector<double>& w, std::size_t channels) {
    if (channels == 0 || w.size() != channels || a.size() % channels != 0) throw ShapeError("weighted_map: bad sizes");
    const std::size_t hw = a.size() / channels;
    std::vector<double> m(hw, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t k = 0; k < hw; ++k) m[k] += w[c] * a[c * hw + k];
    double peak = 0;
    for (double& v : m) {
        v = std::max(v, 0.0);
        peak = std::max(peak, v);
    }
    if (peak > 0)
        for (double& v : m) v /= peak;
    return m;
}

Tensor class_score(const Tensor& logits, int cls) {
    if (cls != 0 && cls != 1) throw ValueError("target class must be 0 or 1");
    return cls == 1 ? logits : scale(logits, Real(-1));
}

namespace {

void check_layer(XccNet& net, std::size_t layer) {
    if (layer >= net.sfx().blocks().size()) {
        throw ValueError("CAM layer " + std::to_string(layer) + " is not an SFx block (have " +
                         std::to_string(net.sfx().blocks().size()) + ")");
    }
}

Tensor activation(XccNet& net, const Tensor& x, std::size_t layer) {
    NoGradScope no_grad;
    return net.sfx().conv_activation(x, layer);
}

std::vector<double> to_double(std::span<const Real> v) { return {v.begin(), v.end()}; }

CamMap gradient_cam(XccNet& net, const GrayImage& img, std::size_t layer, int cls, CamMethod method,
                    bool zero_higher_order) {
    check_layer(net, layer);
    const Tensor x = img.to_tensor();
    Tensor a = activation(net, x, layer).clone();
    a.set_requires_grad();
    const NamedTensors params = net.params();
    std::vector<std::vector<Real>> saved;
    for (const auto& [name, t] : params) saved.push_back(t.has_grad() ? std::vector<Real>(t.grad().begin(), t.grad().end())
                                                                     : std::vector<Real>{});
    {
        Tape tape;
        TapeScope scope(tape);
        Tensor score = sum(class_score(net.logits_from_sfx(a, layer, x), cls));
        tape.backward(score);
    }
    // leave parameter gradients as they were
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor t = params[i].second;
        if (saved[i].empty()) t.zero_grad();
        else std::copy(saved[i].begin(), saved[i].end(), t.grad().begin());
    }
    const std::size_t channels = a.dim(1);
    const std::vector<double> av = to_double(std::as_const(a).data()), gv = to_double(std::as_const(a).grad());
    CamMap cam;
    cam.height = a.dim(2);
    cam.width = a.dim(3);
    cam.layer = layer;
    cam.target_class = cls;
    cam.method = method;
    cam.grid = weighted_map(av, cam_weights(av, gv, channels, method, zero_higher_order), channels);
    return cam;
}

}  // namespace

CamMap grad_cam(XccNet& net, const GrayImage& img, std::size_t layer, int cls) {
    return gradient_cam(net, img, layer, cls, CamMethod::grad_cam, false);
}

CamMap grad_cam_pp(XccNet& net, const GrayImage& img, std::size_t layer, int cls, bool zero_higher_order) {
    return gradient_cam(net, img, layer, cls, CamMethod::grad_cam_pp, zero_higher_order);
}

CamMap score_cam(XccNet& net, const GrayImage& img, std::size_t layer, int cls, std::size_t batch) {
    check_layer(net, layer);
    if (cls != 0 && cls != 1) throw ValueError("target class must be 0 or 1");
    if (batch == 0) throw ValueError("score_cam batch must be positive");
    NoGradScope no_grad;
    const Tensor x = img.to_tensor();
    const Tensor a = activation(net, x, layer);
    const std::size_t channels = a.dim(1), h = a.dim(2), w = a.dim(3), hw = h * w;
    const std::size_t px = img.height * img.width;

    std::vector<double> scores(channels);
    for (std::size_t c0 = 0; c0 < channels; c0 += batch) {
        const std::size_t c1 = std::min(channels, c0 + batch);
        Tensor masked(Shape{c1 - c0, 1, img.height, img.width});
        for (std::size_t c = c0; c < c1; ++c) {
            std::vector<Real> plane(a.ptr() + c * hw, a.ptr() + (c + 1) * hw);
            if (h != img.height || w != img.width) plane = resize_bicubic_plane(plane, h, w, img.height, img.width);
            const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
            const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
            Real* dst = masked.ptr() + (c - c0) * px;
            for (std::size_t k = 0; k < px; ++k) {
                const double m = range > 0 ? (static_cast<double>(plane[k]) - *lo) / range : 0.0;
                dst[k] = static_cast<Real>(m * img.pixels[k]);
            }
        }
        Tensor s = class_score(net.logits(masked), cls);
        for (std::size_t c = c0; c < c1; ++c) scores[c] = s[c - c0];
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0;
    std::vector<double> wts(channels);
    for (std::size_t c = 0; c < channels; ++c) z += wts[c] = std::exp(scores[c] - top);
    for (double& v : wts) v /= z;

    CamMap cam;
    cam.height = h;
    cam.width = w;
    cam.layer = layer;
    cam.target_class = cls;
    cam.method = CamMethod::score_cam;
    cam.grid = weighted_map(to_double(a.data()), wts, channels);
    return cam;
}

CamMap compute_cam(XccNet& net, const GrayImage& img, CamMethod method, std::size_t layer, int cls) {
    switch (method) {
        case CamMethod::grad_cam: return grad_cam(net, img, layer, cls);
        case CamMethod::grad_cam_pp: return grad_cam_pp(net, img, layer, cls);
        case CamMethod::score_cam: return score_cam(net, img, layer, cls);
    }
    throw ValueError("unknown CAM method");
}

GrayImage upsample_cam(const CamMap& cam, std::size_t h, std::size_t w) {
    std::vector<Real> plane(cam.grid.begin(), cam.grid.end());
    GrayImage out(h, w);
    out.pixels = (cam.height == h && cam.width == w) ? plane : resize_bicubic_plane(plane, cam.height, cam.width, h, w);
    for (Real& v : out.pixels) v = std::clamp(v, Real(0), Real(1));
    return out;
}

std::array<double, 3> heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return {std::clamp(3 * v, 0.0, 1.0), std::clamp(3 * v - 1, 0.0, 1.0), std::clamp(3 * v - 2, 0.0, 1.0)};
}

RgbImage overlay(const GrayImage& img, const CamMap& cam, double alpha) {
    const GrayImage up = upsample_cam(cam, img.height, img.width);
    if (up.pixels.size() != img.pixels.size()) throw ShapeError("overlay: upsampled CAM does not match the image");
    RgbImage out{img.height, img.width, std::vector<std::uint8_t>(img.pixels.size() * 3)};
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
        const double c = up.pixels[k], g = img.pixels[k];
        const auto col = heat_color(c);
        for (std::size_t ch = 0; ch < 3; ++ch)
            out.rgb[k * 3 + ch] = to_level(static_cast<Real>((1 - alpha * c) * g + alpha * c * col[ch]));
    }
    return out;
}

std::string cam_sidecar_json(const CamMap& cam, std::size_t img_h, std::size_t img_w) {
    const std::size_t k = cam.argmax();
    const auto [r, c] = cam.argmax_in_image(img_h, img_w);
    nlohmann::ordered_json j;
    j["method"] = cam_method_name(cam.method);
    j["layer"] = cam.layer;
    j["class"] = cam.target_class;
    j["map_height"] = cam.height;
    j["map_width"] = cam.width;
    j["argmax_map"] = {k / cam.width, k % cam.width};
    j["argmax_image"] = {r, c};
    j["peak"] = cam.grid.empty() ? 0.0 : cam.grid[k];
    return j.dump(2) + "\n";
}

}  // namespace xcc::inline XCC_PRECISION_NS
