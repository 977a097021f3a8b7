#include <gtest/gtest.h>

#include "fsg/losses.hpp"
#include "oracles.hpp"

using namespace fsg;

namespace {

std::vector<FeatureMap> random_features(Rng& rng) {
  std::vector<FeatureMap> f;
  const std::array<std::array<std::size_t, 3>, 2> shapes{{{2, 3, 3}, {4, 2, 1}}};
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    FeatureMap m{i, shapes[i][0], shapes[i][1], shapes[i][2], {}};
    m.data.resize(m.size());
    for (double& v : m.data) v = rng.uniform(-1, 1);
    f.push_back(m);
  }
  return f;
}

}  // namespace

TEST(Weights, Defaults) {
  const LossWeights w;
  EXPECT_EQ(w.perc, 1.0);
  EXPECT_EQ(w.pixel, 0.1);
  EXPECT_EQ(w.adv, 0.001);
  EXPECT_EQ(w.seg, 0.1);
  EXPECT_EQ(w.rec, 1.0);
  EXPECT_EQ(w.stepwise, 1.0);
  LossWeights bad;
  bad.adv = -1;
  EXPECT_THROW(validate(bad), InvalidArgument);
}

TEST(Losses, ZeroOnIdenticalInputs) {
  Rng rng(1);
  const auto f = random_features(rng);
  const Image x = oracle::random_image(rng, 3, 3);
  EXPECT_EQ(perceptual_loss(f, f), 0.0);
  EXPECT_EQ(pixel_loss(x, x), 0.0);
  EXPECT_EQ(reconstruction_loss(x, x, f, f), 0.0);
  SegMask m(3, 3, Label::hair);
  EXPECT_EQ(segmentation_pixel_loss(m, m), 0.0);
}

TEST(Losses, HandValues) {
  const std::vector<double> a{0, 1, 2}, b{1, 1, 0};
  EXPECT_DOUBLE_EQ(pixel_loss(a, b), 3.0);
  EXPECT_DOUBLE_EQ(pixel_loss(a, b, Reduction::mean), 1.0);
  SegMask s(1, 2), t(1, 2);
  t.at(0, 0) = Label::face;
  EXPECT_DOUBLE_EQ(segmentation_pixel_loss(s, t), 2.0);
  EXPECT_DOUBLE_EQ(segmentation_objective(0.5, s, t, 0.1), 0.7);
  const ScoreMap half{{0.5, 0.5}};
  const std::vector<ScoreMap> one{half};
  EXPECT_NEAR(gan_loss(one, one, GanSide::discriminator), 2 * std::log(0.5), 1e-12);
  EXPECT_NEAR(gan_loss({}, one, GanSide::generator), -std::log(0.5), 1e-12);
  EXPECT_NEAR(gan_loss({}, one, GanSide::generator, GanReading::minimax), std::log(0.5), 1e-12);
}

TEST(Losses, ComposedObjectives) {
  ReenactmentTerms t{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(reenactment_objective(t), 1.0 + 2.0 + 0.003 + 0.4);
  t.adv.reset();
  EXPECT_THROW(reenactment_objective(t), InvalidArgument);
  EXPECT_DOUBLE_EQ(inpainting_objective(2.0, 5.0), 2.005);
  EXPECT_THROW(inpainting_objective(std::nullopt, 1.0), InvalidArgument);
  const Image x(2, 2, 3, 0.5);
  Image y = x;
  y.at(0, 0, 0) = 0.0;
  const std::vector<FeatureMap> none;
  EXPECT_DOUBLE_EQ(blending_objective(x, y, none, none, 10.0), 0.1 * 0.5 + 0.01);
  EXPECT_THROW(blending_objective(x, std::nullopt, none, none, 0.0), InvalidArgument);
}

TEST(Losses, ShapeChecks) {
  Rng rng(2);
  auto f = random_features(rng), g = random_features(rng);
  g[1].width = 2;
  EXPECT_THROW(perceptual_loss(f, g), InvalidArgument);
  EXPECT_THROW(pixel_loss(Image(2, 2, 3), Image(2, 3, 3)), InvalidArgument);
  const std::vector<ScoreMap> bad{{{1.5}}};
  EXPECT_THROW(gan_loss({}, bad, GanSide::generator), InvalidArgument);
}

TEST(Gradients, MatchCentralDifferences) {
  Rng rng(3);
  auto fx = random_features(rng);
  const auto fy = random_features(rng);
  const auto g = perceptual_loss_grad(fx, fy);
  for (std::size_t i = 0; i < fx.size(); ++i)
    for (std::size_t k = 0; k < fx[i].data.size(); ++k) {
      const double n = oracle::central_difference([&] { return perceptual_loss(fx, fy); }, fx[i].data, k);
      EXPECT_TRUE(oracle::close_rel(g[i][k], n, 1e-4)) << g[i][k] << " vs " << n;
    }

  std::vector<double> x(10), y(10);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
  }
  for (auto red : {Reduction::sum, Reduction::mean}) {
    const auto gp = pixel_loss_grad(x, y, red);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double n = oracle::central_difference([&] { return pixel_loss(x, y, red); }, x, k);
      EXPECT_TRUE(oracle::close_rel(gp[k], n, 1e-4));
    }
  }

  std::vector<ScoreMap> real{{{0.3, 0.8, 0.6}}, {{0.55}}}, fake{{{0.2, 0.45, 0.9}}, {{0.7}}};
  for (auto side : {GanSide::generator, GanSide::discriminator})
    for (auto reading : {GanReading::non_saturating, GanReading::minimax}) {
      const GanGrad gg = gan_loss_grad(real, fake, side, reading);
      for (std::size_t s = 0; s < fake.size(); ++s)
        for (std::size_t k = 0; k < fake[s].data.size(); ++k) {
          const double n =
              oracle::central_difference([&] { return gan_loss(real, fake, side, reading); }, fake[s].data, k);
          EXPECT_TRUE(oracle::close_rel(gg.fake[s][k], n, 1e-4));
        }
      if (side == GanSide::discriminator)
        for (std::size_t s = 0; s < real.size(); ++s)
          for (std::size_t k = 0; k < real[s].data.size(); ++k) {
            const double n =
                oracle::central_difference([&] { return gan_loss(real, fake, side, reading); }, real[s].data, k);
            EXPECT_TRUE(oracle::close_rel(gg.real[s][k], n, 1e-4));
          }
    }
}
