#include <gtest/gtest.h>

#include <cmath>

#include "support/helpers.hpp"
#include "xcc/fusion/metrics.hpp"
#include "xcc/fusion/optim.hpp"

using namespace xcc;
using namespace testing_support;

static_assert(kIsDouble, "optimizer oracle tests run in the f64 build");

namespace {

// Scalar Adam with the gradient penalties folded in.
struct ScalarAdam {
    double lr, b1, b2, eps, l1, l2, m = 0, v = 0;
    int t = 0;
    double step(double theta, double g) {
        g += l1 * (theta > 0 ? 1 : theta < 0 ? -1 : 0) + l2 * theta;
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
        return theta - lr * mh / (std::sqrt(vh) + eps);
    }
};

}  // namespace

TEST(Adam, HundredStepsAgainstScalarOracle) {
    RngStream rng(21);
    for (const auto& [l1, l2] : {std::pair{0.0, 0.0}, std::pair{1e-3, 1e-2}}) {
        Tensor p = param(random_tensor({5}, rng));
        const AdamConfig cfg{1e-2, 0.9, 0.999, 1e-8, l1, l2};
        Adam opt({{"p", p}}, cfg);
        std::vector<ScalarAdam> ref(5, ScalarAdam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, l1, l2});
        std::vector<double> theta = to_vec(p);
        double worst = 0;
        for (int step = 0; step < 100; ++step) {
            opt.zero_grad();
            for (std::size_t i = 0; i < 5; ++i) {
                const double g = rng.uniform(-1, 1);
                p.grad()[i] = g;
                theta[i] = ref[i].step(theta[i], g);
            }
            opt.step();
            worst = std::max(worst, max_abs_diff(to_vec(p), theta));
        }
        EXPECT_LE(worst, 1e-12);
    }
}

TEST(Adam, ZeroGradientLeavesParamsAndConstantGradientStepsByLr) {
    Tensor p = param(Tensor::from({3}, {0.5, -1.0, 2.0}));
    Adam opt({{"p", p}}, AdamConfig{1e-3, 0.9, 0.999, 1e-8, 0, 0});
    opt.zero_grad();
    opt.step();
    EXPECT_EQ(to_vec(p), (std::vector<double>{0.5, -1.0, 2.0}));
    Tensor q = param(Tensor::from({2}, {1.0, 1.0}));
    Adam opt2({{"q", q}}, AdamConfig{1e-3, 0.9, 0.999, 1e-8, 0, 0});
    opt2.zero_grad();
    q.grad()[0] = 0.7;
    q.grad()[1] = -3.0;
    opt2.step();
    // bias-corrected first step: -lr * g / (|g| + eps)
    EXPECT_NEAR(q[0], 1.0 - 1e-3 * 0.7 / (0.7 + 1e-8), 1e-15);
    EXPECT_NEAR(q[1], 1.0 + 1e-3 * 3.0 / (3.0 + 1e-8), 1e-15);
}

TEST(Adam, StateRoundTrip) {
    RngStream rng(22);
    Tensor p = param(random_tensor({4}, rng)), p2 = param(p.clone());
    Adam a({{"p", p}}, AdamConfig{}), b({{"p", p2}}, AdamConfig{});
    for (int s = 0; s < 3; ++s) {
        a.zero_grad();
        for (std::size_t i = 0; i < 4; ++i) p.grad()[i] = rng.uniform(-1, 1);
        a.step();
    }
    std::copy(p.data().begin(), p.data().end(), p2.data().begin());
    b.load_state(a.state());
    EXPECT_EQ(b.steps(), 3);
    a.zero_grad();
    b.zero_grad();
    for (std::size_t i = 0; i < 4; ++i) p.grad()[i] = p2.grad()[i] = 0.3;
    a.step();
    b.step();
    EXPECT_EQ(to_vec(p), to_vec(p2));
}

TEST(Metrics, NinetyPercentCase) {
    const Metrics m = Metrics::from_counts(9, 1, 9, 1);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.9);
    EXPECT_DOUBLE_EQ(m.precision, 0.9);
    EXPECT_DOUBLE_EQ(m.recall, 0.9);
    EXPECT_NEAR(m.f1, 0.9, 1e-15);
    const Metrics all = Metrics::from_counts(5, 0, 5, 0);
    EXPECT_EQ(all.f1, 1.0);
    EXPECT_EQ(all.accuracy, 1.0);
}
