#include <gtest/gtest.h>

#include "fsg/io/images.hpp"
#include "fsg/io/map_file.hpp"
#include "fsg/io/text_formats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fsg;
namespace fs = std::filesystem;
using support::TempDir;

TEST(Fsim, RoundTripIsF32Exact) {
  Rng rng(1);
  Image img = oracle::random_image(rng, 5, 7);
  quantize_f32(img);
  const Image back = io::decode_fsim(io::encode_fsim(img));
  EXPECT_EQ(back.channels(), 3u);
  EXPECT_EQ(std::vector<double>(back.data().begin(), back.data().end()),
            std::vector<double>(img.data().begin(), img.data().end()));
  auto b = io::encode_fsim(img);
  b.pop_back();
  EXPECT_THROW(io::decode_fsim(b), IoError);
  b[12] = 2;
  EXPECT_THROW(io::decode_fsim(b), IoError);
}

TEST(Png, RoundTripAt8Bits) {
  TempDir dir;
  Image img(3, 4, 3);
  for (std::size_t k = 0; k < img.size(); ++k) img.data()[k] = static_cast<double>(k * 7 % 256) / 255.0;
  io::save_image(dir / "a.png", img);
  const Image back = io::load_image(dir / "a.png");
  for (std::size_t k = 0; k < img.size(); ++k) EXPECT_NEAR(back.data()[k], img.data()[k], 1e-12);
  EXPECT_THROW(io::load_image(dir / "missing.png"), IoError);
  io::write_text(dir / "junk.png", "not a png");
  EXPECT_THROW(io::load_image(dir / "junk.png"), IoError);
}

TEST(Masks, LabelsAndFreeRegions) {
  TempDir dir;
  SegMask m(2, 3);
  m.at(0, 1) = Label::face;
  m.at(1, 2) = Label::hair;
  for (const char* name : {"m.png", "m.fsim"}) {
    io::save_mask(dir / name, m);
    EXPECT_EQ(io::load_mask(dir / name), m);
    EXPECT_EQ(io::load_free_mask(dir / name), (std::vector<std::uint8_t>{0, 1, 0, 0, 0, 1}));
  }
  const std::vector<std::uint8_t> raw{0, 255, 7, 0};
  io::write_png_raw(dir / "r.png", raw, 2, 2, 1);
  EXPECT_EQ(io::load_free_mask(dir / "r.png"), (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_THROW(io::load_mask(dir / "r.png"), IoError);
}

TEST(Text, LandmarksPoseConfig) {
  const LandmarkSet p = io::parse_landmarks("3\n1 2 # first\n3 4\n5 6\n");
  EXPECT_EQ(p.points[2], (Point2{5, 6}));
  EXPECT_EQ(io::parse_landmarks(io::format_landmarks(p)), p);
  EXPECT_THROW(io::parse_landmarks("3 1 2 3 4"), InvalidArgument);
  EXPECT_THROW(io::parse_landmarks("3 1 2 3 4 5 x"), InvalidArgument);
  EXPECT_EQ(io::parse_pose("10 -5 2.5"), (EulerPose{10, -5, 2.5}));
  EXPECT_THROW(io::parse_pose("10 -5"), InvalidArgument);
  EXPECT_EQ(io::parse_landmarks3d("3 0 0 1 1 1 2 2 2 3").points[1], (Point3{1, 1, 2}));

  const auto c = io::Config::parse("# comment\nprune_radius = 7.5\nhair_free = yes\n\nsteps=3\n");
  EXPECT_EQ(*c.number("prune_radius"), 7.5);
  EXPECT_TRUE(*c.flag("hair_free"));
  EXPECT_EQ(*c.count("steps"), 3u);
  EXPECT_FALSE(c.get("missing"));
  EXPECT_THROW(io::Config::parse("novalue\n"), InvalidArgument);
  EXPECT_THROW(io::Config::parse("x = maybe").flag("x"), InvalidArgument);
}

TEST(Text, Manifests) {
  const auto rows = io::parse_manifest(
      "# fsg-manifest v1\na img/a.png lm/a.txt 10 5 0 blur=0.3 coverage=0.2\n# skipped\nb /abs/b.fsim b.lm -1 2 3 mask=m.png\n",
      "/data");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].image, fs::path("/data/img/a.png"));
  EXPECT_EQ(*rows[0].blur, 0.3);
  EXPECT_EQ(*rows[0].coverage, 0.2);
  EXPECT_EQ(rows[1].image, fs::path("/abs/b.fsim"));
  EXPECT_EQ(*rows[1].mask, fs::path("/data/m.png"));
  EXPECT_EQ(rows[1].pose, (EulerPose{-1, 2, 3}));
  EXPECT_THROW(io::parse_manifest("a b c 1 2 3\n", "/"), InvalidArgument);
  EXPECT_THROW(io::parse_manifest("# fsg-manifest v1\na b c 1 2\n", "/"), InvalidArgument);
  EXPECT_THROW(io::parse_manifest("# fsg-manifest v1\na b c 1 2 3 size=4\n", "/"), InvalidArgument);

  const auto ev = io::parse_eval_manifest("# fsg-eval v1\nv0 r.png - rp tp rl tl verification=0.4\nv0 r2.png ref.png rp tp rl tl\n", "d");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_FALSE(ev[0].reference);
  EXPECT_EQ(*ev[0].verification, 0.4);
  EXPECT_EQ(*ev[1].reference, fs::path("d/ref.png"));
}

TEST(MapFile, BinaryRoundTrip) {
  std::vector<ViewPoint> v{{{0, 0}, 3, false}, {{20, 10}, 7, true}, {{-30, 5}, 9, false}};
  io::StoredMap s{build_map(v), 6.5};
  const io::StoredMap back = io::decode_map(io::encode_map(s));
  EXPECT_EQ(back.map, s.map);
  EXPECT_EQ(back.prune_radius, 6.5);
  auto b = io::encode_map(s);
  b.push_back(0);
  EXPECT_THROW(io::decode_map(b), IoError);
  b.resize(30);
  EXPECT_THROW(io::decode_map(b), IoError);
  const auto j = io::map_to_json(s);
  EXPECT_EQ(j["views"][1]["id"], 7);
  EXPECT_EQ(j["triangles"].size(), s.map.mesh.size());
}
