#include <gtest/gtest.h>

#include "fsg/poisson.hpp"
#include "oracles.hpp"

using namespace fsg;

namespace {

BlendProblem random_problem(Rng& rng, std::size_t h, std::size_t w, double free_frac) {
  BlendProblem p{oracle::random_image(rng, h, w), oracle::random_image(rng, h, w), {}};
  p.free.resize(h * w);
  for (auto& f : p.free) f = rng.uniform() < free_frac;
  return p;
}

double max_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST(Gradient, ForwardDifferences) {
  Image img(2, 3, 1);
  for (std::size_t j = 0; j < 3; ++j) {
    img.at(0, j) = static_cast<double>(j);
    img.at(1, j) = 2.0 * static_cast<double>(j);
  }
  const Gradient g = discrete_gradient(img);
  EXPECT_EQ(g.gx.at(1, 0), 2.0);
  EXPECT_EQ(g.gx.at(1, 2), 0.0);
  EXPECT_EQ(g.gy.at(0, 2), 2.0);
  EXPECT_EQ(g.gy.at(1, 1), 0.0);
  EXPECT_EQ(gradient_energy(img, img), 0.0);
}

TEST(Blend, EmptyFreeRegionReturnsTarget) {
  Rng rng(1);
  BlendProblem p = random_problem(rng, 6, 7, 0.0);
  const BlendResult r = blend(p);
  EXPECT_EQ(r.image.data()[5], p.target.data()[5]);
  EXPECT_EQ(r.report.free_pixels, 0u);
}

TEST(Blend, FullyFreeReturnsGuide) {
  Rng rng(2);
  BlendProblem p = random_problem(rng, 5, 5, 2.0);
  const BlendResult r = blend(p);
  EXPECT_EQ(max_diff(r.solution, p.source), 0.0);
}

TEST(Blend, ConstantOffsetIsRemoved) {
  // guide = target + c inside a region: gradients agree, so f = target exactly
  Rng rng(3);
  BlendProblem p = random_problem(rng, 12, 12, 0.0);
  for (std::size_t i = 0; i < p.target.size(); ++i) p.target.data()[i] = 0.25 + 0.5 * p.target.data()[i];
  p.source = p.target;
  for (double& v : p.source.data()) v += 0.2;
  for (std::size_t i = 3; i < 9; ++i)
    for (std::size_t j = 3; j < 9; ++j) p.free[i * 12 + j] = 1;
  const BlendResult r = blend(p, {1e-12, {}, SolverMethod::direct});
  EXPECT_LT(max_diff(r.solution, p.target), 1e-10);
}

TEST(Blend, DirectAndCgAgreeWithDenseOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const BlendProblem p = random_problem(rng, 9, 11, 0.6);
    const Image want = oracle::poisson_dense(p.target, p.source, p.free);
    const BlendResult d = blend(p, {1e-10, {}, SolverMethod::direct});
    const BlendResult c = blend(p, {1e-10, {}, SolverMethod::conjugate_gradient});
    EXPECT_LT(max_diff(d.solution, want), 1e-8);
    EXPECT_LT(max_diff(c.solution, want), 1e-8);
    EXPECT_EQ(d.report.method, SolverMethod::direct);
    EXPECT_EQ(c.report.method, SolverMethod::conjugate_gradient);
    EXPECT_LE(c.report.residual, 1e-10);
    for (std::size_t px = 0; px < p.free.size(); ++px)
      if (!p.free[px]) {
        for (std::size_t ch = 0; ch < 3; ++ch) ASSERT_EQ(c.image.data()[px * 3 + ch], p.target.data()[px * 3 + ch]);
      }
  }
}

TEST(Blend, AutomaticPicksBySize) {
  Rng rng(5);
  BlendProblem p = random_problem(rng, 8, 8, 0.5);
  EXPECT_EQ(blend(p).report.method, SolverMethod::direct);
  BlendOptions o;
  o.direct_limit = 1;
  EXPECT_EQ(blend(p, o).report.method, SolverMethod::conjugate_gradient);
}

TEST(Blend, IterationCapRaisesConvergenceError) {
  Rng rng(6);
  BlendProblem p = random_problem(rng, 30, 30, 0.9);
  BlendOptions o;
  o.method = SolverMethod::conjugate_gradient;
  o.max_iter = 2;
  o.tol = 1e-12;
  try {
    blend(p, o);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::convergence);
    EXPECT_GT(e.report().residual, 1e-12);
  }
}

TEST(Blend, InputValidation) {
  Rng rng(7);
  BlendProblem p = random_problem(rng, 4, 4, 0.5);
  p.free.pop_back();
  EXPECT_THROW(blend(p), InvalidArgument);
  p = random_problem(rng, 4, 4, 0.5);
  p.source.at(0, 0, 0) = 2.0;
  EXPECT_THROW(blend(p), InvalidArgument);
  p = random_problem(rng, 4, 4, 0.5);
  BlendOptions zero;
  zero.tol = 0.0;
  EXPECT_THROW(blend(p, zero), InvalidArgument);
}

TEST(Blend, HairFollowsTheFlag) {
  SegMask m(1, 3);
  m.at(0, 0) = Label::face;
  m.at(0, 1) = Label::hair;
  EXPECT_EQ(free_mask(m), (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(free_mask(m, true), (std::vector<std::uint8_t>{1, 1, 0}));
}
