#include <gtest/gtest.h>

#include "fsg/curation.hpp"
#include "oracles.hpp"

using namespace fsg;

namespace {

FrameRecord frame(std::string id, double yaw, double pitch, std::vector<Point2> lm, double coverage = 1.0) {
  FrameRecord f;
  f.id = std::move(id);
  f.point = {yaw, pitch};
  f.coverage = coverage;
  f.landmarks.points = std::move(lm);
  return f;
}

std::vector<std::vector<double>> flatten(const std::vector<FrameRecord>& fr) {
  std::vector<std::vector<double>> v;
  for (const auto& f : fr) {
    v.emplace_back();
    for (const auto& p : f.landmarks.points) {
      v.back().push_back(p.x);
      v.back().push_back(p.y);
    }
  }
  return v;
}

}  // namespace

TEST(Coverage, BoundaryIsInclusive) {
  std::vector<FrameRecord> f{frame("a", 0, 0, {}, 0.14), frame("b", 20, 0, {}, 0.15), frame("c", 40, 0, {}, 0.9)};
  EXPECT_EQ(prune_frames(f), (std::vector<std::size_t>{1, 2}));
}

TEST(Curation, BlurAndAngularPruning) {
  std::vector<FrameRecord> f{frame("a", 0, 0, {}), frame("b", 1, 0, {}), frame("c", 30, 0, {})};
  f[0].roll = 10;
  f[2].blur = 5.0;
  CurationOptions o;
  o.blur_threshold = 1.0;
  EXPECT_EQ(prune_frames(f, o), (std::vector<std::size_t>{1}));
}

TEST(BlurScore, SharpScoresLower) {
  Image sharp(8, 8, 1, 0.0), flat(8, 8, 1, 0.5);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) sharp.at(i, j) = (i + j) % 2 ? 1.0 : 0.0;
  EXPECT_LT(blur_score(sharp), blur_score(flat));
  EXPECT_EQ(blur_score(flat), 0.0);
  EXPECT_THROW(blur_score(Image(2, 2, 1)), InvalidArgument);
}

TEST(Selection, LineOfSixKeepsExtremesAndMiddle) {
  std::vector<FrameRecord> f;
  const std::array<double, 6> xs{0, 1, 2, 4.5, 7, 10};
  for (double x : xs) f.push_back(frame("", 0, 0, {{x, 0}}));
  EXPECT_EQ(select_max_variance(f, 3), (std::vector<std::size_t>{0, 3, 5}));
}

TEST(Selection, CapAndSmallInputs) {
  std::vector<FrameRecord> f;
  for (int i = 0; i < 5; ++i) f.push_back(frame("", 0, 0, {{static_cast<double>(i * i), 0}}));
  EXPECT_EQ(select_max_variance(f, 10).size(), 5u);
  EXPECT_EQ(select_max_variance(f, 1).size(), 1u);
  EXPECT_THROW(select_max_variance(f, 0), InvalidArgument);
}

TEST(Selection, AtLeastHalfTheOptimalDispersion) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FrameRecord> f;
    const int n = static_cast<int>(rng.integer(4, 8));
    for (int i = 0; i < n; ++i) f.push_back(frame("", 0, 0, {{rng.uniform(), rng.uniform()}, {rng.uniform(), 0}}));
    const auto v = flatten(f);
    for (std::size_t cap = 2; cap < static_cast<std::size_t>(n); ++cap) {
      const auto s = select_max_variance(f, cap);
      ASSERT_EQ(s.size(), cap);
      const double got = oracle::min_pairwise(v, s), best = oracle::max_dispersion(v, cap);
      EXPECT_GE(got, 0.5 * best - 1e-12);
      if (cap == 2) {
        EXPECT_DOUBLE_EQ(got, best);
      }
    }
  }
}
