#pragma once

// Independent straight-line reference implementations used by unit and
// acceptance tests. Nothing here calls into the library's kernels; inputs
// and outputs are plain row-major vectors of double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// Centered dilated cross-correlation, one image [C,H,W], kernel [O,C,k,k],
// zero padding p on every side. Output [O, H+2p-ext+1, W+2p-ext+1].
inline Vec conv_centered(const Vec& x, std::size_t C, std::size_t H, std::size_t W, const Vec& w,
                         std::size_t O, std::size_t k, std::size_t d, std::size_t pad) {
    const long ext = static_cast<long>(d * (k - 1) + 1);
    const long ho = static_cast<long>(H + 2 * pad) - ext + 1;
    const long wo = static_cast<long>(W + 2 * pad) - ext + 1;
    Vec y(O * static_cast<std::size_t>(ho * wo), 0.0);
    for (std::size_t o = 0; o < O; ++o)
        for (long i = 0; i < ho; ++i)
            for (long j = 0; j < wo; ++j) {
                double acc = 0;
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t m = 0; m < k; ++m)
                        for (std::size_t n = 0; n < k; ++n) {
                            const long si = i + static_cast<long>(d * m) - static_cast<long>(pad);
                            const long sj = j + static_cast<long>(d * n) - static_cast<long>(pad);
                            if (si < 0 || sj < 0 || si >= static_cast<long>(H) || sj >= static_cast<long>(W))
                                continue;
                            acc += x[(c * H + si) * W + sj] * w[((o * C + c) * k + m) * k + n];
                        }
                y[(o * ho + i) * wo + j] = acc;
            }
    return y;
}

// Literal y[i,j] = sum x[i - d m, j - d n] f[m,n], zeros outside.
inline Vec eq12(const Vec& x, std::size_t H, std::size_t W, const Vec& f, std::size_t k, std::size_t d) {
    Vec y(H * W, 0.0);
    for (long i = 0; i < static_cast<long>(H); ++i)
        for (long j = 0; j < static_cast<long>(W); ++j)
            for (long m = 0; m < static_cast<long>(k); ++m)
                for (long n = 0; n < static_cast<long>(k); ++n) {
                    const long si = i - static_cast<long>(d) * m, sj = j - static_cast<long>(d) * n;
                    if (si < 0 || sj < 0 || si >= static_cast<long>(H) || sj >= static_cast<long>(W)) continue;
                    y[i * W + j] += x[si * W + sj] * f[m * k + n];
                }
    return y;
}

inline Vec matmul(const Vec& a, const Vec& b, std::size_t m, std::size_t p, std::size_t n) {
    Vec c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t t = 0; t < p; ++t) c[i * n + j] += a[i * p + t] * b[t * n + j];
    return c;
}

// Catmull-Rom style cubic basis with parameter a.
inline double cubic(double t, double a) {
    t = std::abs(t);
    if (t <= 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
    if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
    return 0;
}

// Bicubic resize: source coordinate x/alpha with alpha = out/in, 4x4 taps at
// floor(src) - 1 .. floor(src) + 2, clamped reads, output clipped to [0,1].
inline Vec bicubic(const Vec& img, std::size_t H, std::size_t W, std::size_t oh, std::size_t ow, double a) {
    Vec out(oh * ow);
    const double ay = static_cast<double>(oh) / H, ax = static_cast<double>(ow) / W;
    auto px = [&](long r, long c) {
        r = std::clamp(r, 0L, static_cast<long>(H) - 1);
        c = std::clamp(c, 0L, static_cast<long>(W) - 1);
        return img[r * W + c];
    };
    for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            const double sy = i / ay, sx = j / ax;
            const long y0 = static_cast<long>(std::floor(sy)), x0 = static_cast<long>(std::floor(sx));
            double acc = 0;
            for (long m = -1; m <= 2; ++m)
                for (long n = -1; n <= 2; ++n)
                    acc += px(y0 + m, x0 + n) * cubic(sy - (y0 + m), a) * cubic(sx - (x0 + n), a);
            out[i * ow + j] = std::clamp(acc, 0.0, 1.0);
        }
    return out;
}

// Global histogram equalization on 8-bit levels: v -> cdf(v) / N.
inline Vec hist_eq(const Vec& img) {
    std::vector<long> hist(256, 0);
    auto level = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    for (double v : img) ++hist[level(v)];
    std::vector<double> cdf(256);
    long run = 0;
    for (int b = 0; b < 256; ++b) {
        run += hist[b];
        cdf[b] = static_cast<double>(run) / img.size();
    }
    int occupied = 0;
    for (long h : hist) occupied += h > 0;
    Vec out(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = occupied <= 1 ? img[i] : cdf[level(img[i])];
    return out;
}

// Straight-line CLAHE following the documented recipe.
inline Vec clahe(const Vec& img, std::size_t H, std::size_t W, std::size_t ty, std::size_t tx, double clip) {
    auto level = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    std::vector<std::size_t> rb(ty + 1), cb(tx + 1);
    for (std::size_t t = 0; t <= ty; ++t) rb[t] = static_cast<std::size_t>(std::lround(double(t) * H / ty));
    for (std::size_t t = 0; t <= tx; ++t) cb[t] = static_cast<std::size_t>(std::lround(double(t) * W / tx));
    std::vector<std::vector<double>> lut(ty * tx, std::vector<double>(256));
    std::vector<bool> degenerate(ty * tx, false);
    for (std::size_t a = 0; a < ty; ++a)
        for (std::size_t b = 0; b < tx; ++b) {
            std::vector<long> hist(256, 0);
            long npx = 0;
            for (std::size_t r = rb[a]; r < rb[a + 1]; ++r)
                for (std::size_t c = cb[b]; c < cb[b + 1]; ++c) {
                    ++hist[level(img[r * W + c])];
                    ++npx;
                }
            int occupied = 0;
            for (long h : hist) occupied += h > 0;
            degenerate[a * tx + b] = occupied <= 1;
            long limit = std::max<long>(static_cast<long>(clip * npx / 256.0), 1);
            long excess = 0;
            for (long& h : hist)
                if (h > limit) {
                    excess += h - limit;
                    h = limit;
                }
            const long each = excess / 256;
            long rem = excess - each * 256;
            for (long& h : hist) h += each;
            if (rem > 0) {
                const long step = std::max<long>(256 / rem, 1);
                for (int bin = 0; bin < 256 && rem > 0; bin += step, --rem) ++hist[bin];
            }
            long run = 0;
            for (int bin = 0; bin < 256; ++bin) {
                run += hist[bin];
                lut[a * tx + b][bin] = static_cast<double>(run) / npx;
            }
        }
    auto map = [&](std::size_t t, double v) { return degenerate[t] ? v : lut[t][level(v)]; };
    Vec out(H * W);
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) {
            // tile-center coordinates
            const double fy = (r + 0.5) * ty / H - 0.5, fx = (c + 0.5) * tx / W - 0.5;
            const long y0 = static_cast<long>(std::floor(fy)), x0 = static_cast<long>(std::floor(fx));
            const double wy = fy - y0, wx = fx - x0;
            auto tile = [&](long a, long b) {
                a = std::clamp(a, 0L, static_cast<long>(ty) - 1);
                b = std::clamp(b, 0L, static_cast<long>(tx) - 1);
                return static_cast<std::size_t>(a * tx + b);
            };
            const double v = img[r * W + c];
            const double top = (1 - wx) * map(tile(y0, x0), v) + wx * map(tile(y0, x0 + 1), v);
            const double bot = (1 - wx) * map(tile(y0 + 1, x0), v) + wx * map(tile(y0 + 1, x0 + 1), v);
            out[r * W + c] = std::clamp((1 - wy) * top + wy * bot, 0.0, 1.0);
        }
    return out;
}

// Brute-force NT-Xent over 2N views: views[i] and views[partner[i]] are positives.
inline double nt_xent(const std::vector<Vec>& views, const std::vector<std::size_t>& partner, double tau) {
    auto cosine = [](const Vec& a, const Vec& b) {
        double ab = 0, aa = 0, bb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ab += a[i] * b[i];
            aa += a[i] * a[i];
            bb += b[i] * b[i];
        }
        return ab / std::sqrt(aa * bb);
    };
    double total = 0;
    for (std::size_t x = 0; x < views.size(); ++x) {
        double denom = 0;
        for (std::size_t k = 0; k < views.size(); ++k)
            if (k != x) denom += std::exp(cosine(views[x], views[k]) / tau);
        total += -std::log(std::exp(cosine(views[x], views[partner[x]]) / tau) / denom);
    }
    return total / views.size();
}

// Per-head attention loop: softmax(q_t . k_s / sqrt(dh)) v_s.
inline Vec attention(const Vec& q, const Vec& k, const Vec& v, std::size_t T, std::size_t d, std::size_t heads) {
    const std::size_t dh = d / heads;
    Vec out(T * d, 0.0);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> s(T);
            double mx = -1e300;
            for (std::size_t u = 0; u < T; ++u) {
                double acc = 0;
                for (std::size_t e = 0; e < dh; ++e) acc += q[t * d + h * dh + e] * k[u * d + h * dh + e];
                s[u] = acc / std::sqrt(static_cast<double>(dh));
                mx = std::max(mx, s[u]);
            }
            double z = 0;
            for (double& x : s) z += (x = std::exp(x - mx));
            for (std::size_t u = 0; u < T; ++u)
                for (std::size_t e = 0; e < dh; ++e) out[t * d + h * dh + e] += s[u] / z * v[u * d + h * dh + e];
        }
    return out;
}

// Adam with bias correction, plus l2 * theta and l1 * sign(theta) on the gradient.
struct Adam {
    double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8, l1 = 0, l2 = 0;
    double m = 0, v = 0;
    long t = 0;
    double step(double theta, double g) {
        const double sgn = theta > 0 ? 1.0 : (theta < 0 ? -1.0 : 0.0);
        g += l2 * theta + l1 * sgn;
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
        const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
        return theta - lr * mh / (std::sqrt(vh) + eps);
    }
};

// Solves A x = b for square A[n, n] by Gaussian elimination with partial pivoting.
inline Vec solve(Vec A, Vec b, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
        for (std::size_t j = 0; j < n; ++j) std::swap(A[c * n + j], A[piv * n + j]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r * n + c] / A[c * n + c];
            for (std::size_t j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
            b[r] -= f * b[c];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= A[i * n + j] * x[j];
        x[i] = acc / A[i * n + i];
    }
    return x;
}

}  // namespace oracle
