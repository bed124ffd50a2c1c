#include <gtest/gtest.h>

#include <cmath>

#include "support/helpers.hpp"
#include "xcc/ada/augment.hpp"
#include "xcc/cxp/phantoms.hpp"
#include "xcc/tensor/grad_check.hpp"

using namespace xcc;
using namespace testing_support;

static_assert(kIsDouble, "ada tests run in the f64 build");

namespace {

AdaConfig tiny_config() {
    AdaConfig cfg;
    cfg.z_dim = 8;
    cfg.resolution = 8;
    cfg.channels = 4;
    cfg.batch = 4;
    cfg.steps = 4;
    return cfg;
}

std::vector<GrayImage> blobs(std::size_t n, std::size_t size, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<GrayImage> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_blob_sample({size, 0.03}, 0, rng).image);
    return out;
}

double sigmoid_d(double x) { return 1 / (1 + std::exp(-x)); }

}  // namespace

TEST(Mapping, ZeroWeightsGiveZeroStyle) {
    RngStream rng(1);
    MappingNet m(8, 3, rng);
    for (Linear& l : m.layers()) {
        std::fill(l.weight.data().begin(), l.weight.data().end(), 0);
        std::fill(l.bias.data().begin(), l.bias.data().end(), 0);
    }
    Tensor w = m(random_tensor({3, 8}, rng));
    for (Real v : w.data()) EXPECT_EQ(v, 0);
}

TEST(Mapping, GradientsAndDeterminism) {
    RngStream a(2), b(2);
    MappingNet m1(6, 3, a), m2(6, 3, b);
    RngStream rng(3);
    Tensor z = random_tensor({4, 6}, rng);
    EXPECT_EQ(to_vec(m1(z)), to_vec(m2(z)));
    NamedTensors p;
    m1.params(p, "map");
    const GradCheckResult r = grad_check([&] { return weighted_sum(m1(z)); }, p);
    EXPECT_TRUE(r.ok) << r.worst << " " << r.max_rel_error;
}

TEST(AdaIN, MomentIdentity) {
    RngStream rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({2, 3, 5, 4}, rng, -2, 3);
        Tensor mu = random_tensor({2, 3}, rng, -1, 1), sd = random_tensor({2, 3}, rng, 0.2, 2);
        Tensor y = adain(x, mu, sd);
        for (std::size_t g = 0; g < 6; ++g) {
            double m = 0, v = 0;
            for (std::size_t i = 0; i < 20; ++i) m += y[g * 20 + i];
            m /= 20;
            for (std::size_t i = 0; i < 20; ++i) v += (y[g * 20 + i] - m) * (y[g * 20 + i] - m);
            EXPECT_NEAR(m, mu[g], 1e-9);
            EXPECT_NEAR(std::sqrt(v / 20), sd[g], 1e-9);
        }
    }
}

TEST(AdaIN, IdentityAndStandardize) {
    RngStream rng(5);
    Tensor x = random_tensor({1, 2, 4, 4}, rng);
    Tensor mu(Shape{1, 2}), sd(Shape{1, 2});
    for (std::size_t c = 0; c < 2; ++c) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 16; ++i) m += x[c * 16 + i];
        m /= 16;
        for (std::size_t i = 0; i < 16; ++i) v += (x[c * 16 + i] - m) * (x[c * 16 + i] - m);
        mu[c] = m;
        sd[c] = std::sqrt(v / 16);
    }
    EXPECT_LE(max_abs_diff(to_vec(adain(x, mu, sd)), to_vec(x)), 1e-12);
    Tensor z = adain(x, Tensor::zeros({1, 2}), Tensor::ones({1, 2}));
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(z[i], (x[i] - mu[0]) / sd[0], 1e-12);
}

TEST(GanLosses, Endpoints) {
    // logits far enough out that sigmoid rounds to 0 / 1 inside the clamp
    GanLosses l = gan_losses(Tensor::from({2}, {60, 60}), Tensor::from({2}, {-60, -60}));
    EXPECT_NEAR(l.d_loss.item(), 0, 1e-11);
    GanLosses h = gan_losses(Tensor::from({2}, {1, 2}), Tensor::from({2}, {0, 0}));
    EXPECT_NEAR(h.g_loss.item(), std::log(2.0), 1e-15);
}

TEST(GanLosses, MatchesDirectFormula) {
    RngStream rng(6);
    Tensor r = random_tensor({7}, rng, -3, 3), f = random_tensor({7}, rng, -3, 3);
    double ld = 0, lg = 0;
    for (std::size_t i = 0; i < 7; ++i) {
        ld += -std::log(sigmoid_d(r[i])) / 7 - std::log(1 - sigmoid_d(f[i])) / 7;
        lg += -std::log(sigmoid_d(f[i])) / 7;
    }
    GanLosses l = gan_losses(r, f);
    EXPECT_NEAR(l.d_loss.item(), ld, 1e-12);
    EXPECT_NEAR(l.g_loss.item(), lg, 1e-12);
}

TEST(GanLosses, Gradients) {
    RngStream rng(7);
    Tensor r = param(random_tensor({5}, rng, -3, 3)), f = param(random_tensor({5}, rng, -3, 3));
    EXPECT_TRUE(grad_check([&] { return gan_losses(r, f).d_loss; }, {{"r", r}, {"f", f}}).ok);
    EXPECT_TRUE(grad_check([&] { return gan_losses(r, f).g_loss; }, {{"f", f}}).ok);
    Tensor w = param(random_tensor({3, 4}, rng));
    EXPECT_TRUE(grad_check([&] { return style_norm_penalty(w, 0.7); }, {{"w", w}}).ok);
}

TEST(AdaTotalLoss, Cases) {
    Tensor d = Tensor::scalar(0.3), g = Tensor::scalar(0.9);
    Tensor unit = Tensor::from({2, 2}, {1, 0, 0.6, 0.8});
    EXPECT_NEAR(ada_total_loss(d, g, unit, 0).item(), 1.2, 1e-15);
    EXPECT_NEAR(ada_total_loss(d, g, unit, 5).item(), 1.2, 1e-15);
    Tensor two = Tensor::from({1, 2}, {0, 2});
    EXPECT_NEAR(ada_total_loss(d, g, two, 1).item(), 2.2, 1e-15);
    EXPECT_THROW(ada_total_loss(d, g, two, -1), ValueError);
}

TEST(Generator, ShapeRangeAndSplit) {
    AdaConfig cfg = tiny_config();
    cfg.resolution = 16;
    RngStream rng(8);
    Generator gen(cfg, rng);
    EXPECT_EQ(gen.stages(), 3u);
    EXPECT_EQ(gen.w1_stages(), 1u);
    Tensor w;
    Tensor y = gen.forward(random_tensor({2, 8}, rng), &w);
    EXPECT_EQ(y.shape(), (Shape{2, 1, 16, 16}));
    EXPECT_EQ(w.shape(), (Shape{2, 8}));
    for (Real v : y.data()) {
        EXPECT_GT(v, 0);
        EXPECT_LT(v, 1);
    }
    Discriminator disc(cfg, rng);
    EXPECT_EQ(disc.forward(y).shape(), (Shape{2, 1}));
}

TEST(Generator, SecondHalfOfStyleOnlyReachesLateStages) {
    AdaConfig cfg = tiny_config();
    cfg.resolution = 16;
    RngStream rng(9);
    Generator gen(cfg, rng);
    Tensor w = param(random_tensor({1, 8}, rng));
    Tape tape;
    TapeScope scope(tape);
    Tensor y = gen.synthesize(w);
    tape.backward(weighted_sum(y));
    // both halves influence the image
    double g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < 4; ++i) g1 += std::abs(w.grad()[i]), g2 += std::abs(w.grad()[4 + i]);
    EXPECT_GT(g1, 0);
    EXPECT_GT(g2, 0);
}

TEST(Generator, GradientsThroughSynthesis) {
    AdaConfig cfg = tiny_config();
    RngStream rng(10);
    Generator gen(cfg, rng);
    Discriminator disc(cfg, rng);
    Tensor z = random_tensor({2, 8}, rng);
    NamedTensors p;
    gen.params(p);
    disc.params(p);
    GradCheckOptions opts;
    opts.max_entries = 60;
    Tensor real = random_tensor({2, 1, 8, 8}, rng, 0, 1);
    auto loss = [&] {
        GanLosses l = gan_losses(disc.forward(real), disc.forward(gen.forward(z)));
        return add(l.d_loss, l.g_loss);
    };
    const GradCheckResult r = grad_check(loss, p, opts);
    EXPECT_TRUE(r.ok) << r.worst << " " << r.max_rel_error;
}

TEST(TrainAda, ZeroStepsAndDeterminism) {
    AdaConfig cfg = tiny_config();
    auto real = blobs(16, 8, 11);
    cfg.steps = 0;
    AdaTrainResult zero = train_ada(real, cfg);
    EXPECT_TRUE(zero.curve.empty());
    RngStream init(cfg.seed);
    RngStream init_rng = init.split(1);
    Generator fresh(cfg, init_rng);
    RngStream s1(5), s2(5);
    EXPECT_EQ(zero.generator.sample(2, s1)[0].pixels, fresh.sample(2, s2)[0].pixels);

    cfg.steps = 6;
    cfg.sample_every = 3;
    AdaTrainResult a = train_ada(real, cfg), b = train_ada(real, cfg);
    ASSERT_EQ(a.curve.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(a.curve[i].d_loss, b.curve[i].d_loss);
        EXPECT_EQ(a.curve[i].g_loss, b.curve[i].g_loss);
        EXPECT_TRUE(std::isfinite(a.curve[i].total));
        EXPECT_DOUBLE_EQ(a.curve[i].total, a.curve[i].d_loss + a.curve[i].g_loss + a.curve[i].reg);
    }
    EXPECT_EQ(a.sample_grids.size(), 2u);
    EXPECT_EQ(a.sample_grids[0].second.height, 32u);
}

TEST(TrainAda, Errors) {
    AdaConfig cfg = tiny_config();
    EXPECT_THROW(train_ada(blobs(15, 8, 12), cfg), ValueError);
    EXPECT_THROW(train_ada(blobs(16, 16, 12), cfg), ShapeError);
    cfg.lambda_reg = -1;
    EXPECT_THROW(train_ada(blobs(16, 8, 12), cfg), ValueError);
}

TEST(Augment, TableOneArithmetic) {
    const GrayImage tiny(8, 8, 0.5);
    ImageSampler fill = [&](std::size_t) { return tiny; };
    auto run = [&](std::size_t have, std::size_t target) {
        std::map<int, std::vector<GrayImage>> real{{0, std::vector<GrayImage>(have, tiny)}};
        return count_by_class(augment_dataset(real, {{0, target}}, {{0, fill}}))[0];
    };
    ClassCounts kermany = run(1583, 4207);
    EXPECT_EQ(kermany.synthetic, 2624u);
    EXPECT_EQ(kermany.total, 4207u);
    ClassCounts vindr = run(1110, 5970);
    EXPECT_EQ(vindr.synthetic, 4860u);
    EXPECT_EQ(vindr.total, 5970u);
}

TEST(Augment, ConservesRealsAndFlagsOrigin) {
    RngStream rng(13);
    std::map<int, std::vector<GrayImage>> real;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 3 + c; ++i) real[c].push_back(GrayImage(8, 8, static_cast<Real>(rng.uniform())));
    AdaConfig cfg = tiny_config();
    RngStream grng(14);
    Generator gen(cfg, grng);
    auto data = augment_dataset(real, {{0, 6}, {1, 4}}, {{0, generator_sampler(gen, 7)}});
    ASSERT_EQ(data.size(), 10u);
    std::size_t idx = 0;
    for (const auto& [label, images] : real)
        for (const GrayImage& g : images) {
            EXPECT_EQ(data[idx].origin, Origin::real);
            EXPECT_EQ(data[idx].label, label);
            EXPECT_EQ(data[idx++].image.pixels, g.pixels);
        }
    for (; idx < data.size(); ++idx) {
        EXPECT_EQ(data[idx].origin, Origin::synthetic);
        EXPECT_EQ(data[idx].label, 0);
    }
    // synthetic draws are reproducible
    auto again = augment_dataset(real, {{0, 6}, {1, 4}}, {{0, generator_sampler(gen, 7)}});
    EXPECT_EQ(again.back().image.pixels, data.back().image.pixels);
}

TEST(Augment, NoOpAndErrors) {
    std::map<int, std::vector<GrayImage>> real{{0, {GrayImage(8, 8)}}, {1, {GrayImage(8, 8), GrayImage(8, 8)}}};
    EXPECT_EQ(augment_dataset(real, {{0, 1}, {1, 2}}, {}).size(), 3u);
    EXPECT_THROW(augment_dataset(real, {{0, 3}}, {}), ValueError);
    EXPECT_THROW(augment_dataset(real, {{1, 1}}, {}), ValueError);
}
