#include <gtest/gtest.h>

#include "fsg/metrics.hpp"
#include "oracles.hpp"

using namespace fsg;

TEST(Ssim, IdentityAndSymmetry) {
  Rng rng(1);
  const Image a = oracle::random_image(rng, 20, 20), b = oracle::random_image(rng, 20, 20);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
  EXPECT_LT(ssim(a, b), 0.5);
}

TEST(Ssim, ConstantImagesHaveClosedForm) {
  for (double x : {0.0, 0.2, 0.5}) {
    for (double y : {0.1, 0.5, 0.9}) {
      const Image a(16, 16, 1, x), b(16, 16, 1, y);
      EXPECT_NEAR(ssim(a, b), oracle::ssim_constant(x, y), 1e-9);
    }
  }
}

TEST(Ssim, RejectsMismatchedOrTinyInputs) {
  EXPECT_THROW(ssim(Image(16, 16, 1), Image(16, 15, 1)), InvalidArgument);
  EXPECT_THROW(ssim(Image(8, 8, 1), Image(8, 8, 1)), InvalidArgument);
}

TEST(PoseError, Euclidean) {
  EXPECT_DOUBLE_EQ(pose_error({1, 2, 2}, {0, 0, 0}), 3.0);
}

TEST(LandmarkError, BothReductions) {
  const LandmarkSet a{{{0, 0}, {0, 0}, {0, 0}, {0, 0}}};
  const LandmarkSet b{{{3, 4}, {3, 4}, {3, 4}, {3, 4}}};
  EXPECT_DOUBLE_EQ(landmark_error(a, b), 10.0);
  EXPECT_DOUBLE_EQ(landmark_error(a, b, LandmarkReduction::mean_per_point), 5.0);
}

TEST(NearestPose, FirstOnTies) {
  const std::vector<EulerPose> p{{10, 0, 0}, {-10, 0, 0}, {3, 1, 0}};
  EXPECT_EQ(nearest_pose(p, {0, 0, 0}), 2u);
  EXPECT_EQ(nearest_pose(std::span(p).first(2), {0, 0, 0}), 0u);
}

TEST(Aggregate, MeansOfVideoMeans) {
  std::vector<std::vector<SwapEval>> v(2);
  v[0] = {{std::nullopt, 0.4, 1.0, 10.0}, {std::nullopt, 0.6, 3.0, 30.0}};
  v[1] = {{0.7, 0.8, 4.0, 40.0}};
  const EvalSummary s = aggregate(v);
  EXPECT_EQ(s.videos, 2u);
  EXPECT_DOUBLE_EQ(s.ssim.mean, 0.65);
  EXPECT_NEAR(s.ssim.std, 0.15, 1e-12);
  EXPECT_DOUBLE_EQ(s.euler.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.euler.std, 1.0);
  ASSERT_TRUE(s.verification);
  EXPECT_DOUBLE_EQ(s.verification->mean, 0.7);
  EXPECT_EQ(format_mean_std(s.landmarks), "30.00 ± 10.00");
  EXPECT_EQ(summary_csv(s, "m"), "method,verification,SSIM,euler,landmarks\nm,0.70 ± 0.00,0.65 ± 0.15,3.00 ± 1.00,30.00 ± 10.00\n");
  EXPECT_THROW(aggregate({}), InvalidArgument);
}
