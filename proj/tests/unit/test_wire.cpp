#include <gtest/gtest.h>

#include <unistd.h>

#include "fsg/pipeline/endpoint.hpp"
#include "fsg/pipeline/wire.hpp"
#include "oracles.hpp"

using namespace fsg;

namespace {

GeneratorRequest request(Rng& rng, Role role, std::size_t h, std::size_t w, std::size_t planes = 5) {
  GeneratorRequest r;
  r.role = role;
  r.image = oracle::random_image(rng, h, w);
  quantize_f32(r.image);
  if (role == Role::reenact) {
    r.heatmap = Heatmap{planes, h, w, std::vector<float>(planes * h * w)};
    for (float& v : r.heatmap->data) v = static_cast<float>(rng.uniform());
  }
  if (role == Role::blend) {
    r.target = oracle::random_image(rng, h, w);
    quantize_f32(*r.target);
  }
  if (role == Role::inpaint || role == Role::blend) {
    r.mask = SegMask(h, w);
    for (Label& l : r.mask->labels()) l = static_cast<Label>(rng.integer(0, 2));
  }
  return r;
}

std::vector<std::string> peer(const std::string& mode = "echo") { return {FSG_PEER_PATH, "--mode", mode}; }

}  // namespace

TEST(Wire, HeaderLayout) {
  Rng rng(1);
  const auto b = wire::encode_request(request(rng, Role::inpaint, 2, 3));
  ASSERT_EQ(b.size(), wire::frame_size(1, 2, 3));
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "FSGN");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 'c');
  EXPECT_EQ(b[6] | b[7] << 8, 1);
  EXPECT_EQ(b[8], 2);
  EXPECT_EQ(b[12], 3);
}

TEST(Wire, FrameSizeFormula) {
  // 70 heatmap planes at 256 x 256
  EXPECT_EQ(wire::frame_size(70, 256, 256), 16u + 4u * 73u * 256u * 256u);
  EXPECT_EQ(wire::frame_size(70, 256, 256), 19136528u);
}

TEST(Wire, RequestRoundTripPerRole) {
  Rng rng(2);
  for (Role role : {Role::reenact, Role::segment, Role::inpaint, Role::blend}) {
    const GeneratorRequest r = request(rng, role, 5, 4);
    const GeneratorRequest d = wire::decode_request(wire::encode_request(r));
    EXPECT_EQ(d.role, role);
    EXPECT_EQ(d.image.data()[7], r.image.data()[7]);
    EXPECT_EQ(d.heatmap.has_value(), role == Role::reenact);
    if (d.heatmap) {
      EXPECT_EQ(d.heatmap->data, r.heatmap->data);
    }
    if (d.target) {
      EXPECT_EQ(d.target->data()[3], r.target->data()[3]);
    }
    if (d.mask) {
      EXPECT_EQ(*d.mask, *r.mask);
    }
  }
}

TEST(Wire, ResponseRoundTrip) {
  Rng rng(3);
  const GeneratorRequest r = request(rng, Role::segment, 3, 3);
  GeneratorResponse res{r.image, SegMask(3, 3, Label::hair)};
  const auto d = wire::decode_response(wire::encode_response(Role::segment, res), r);
  EXPECT_EQ(d.mask, res.mask);
  EXPECT_EQ(d.image.data()[4], r.image.data()[4]);
}

TEST(Wire, HeaderRejections) {
  Rng rng(4);
  const auto good = wire::encode_request(request(rng, Role::segment, 2, 2));
  auto mutate = [&](std::size_t at, std::uint8_t v) {
    auto b = good;
    b[at] = v;
    return b;
  };
  EXPECT_THROW(wire::decode_request(mutate(0, 'X')), FramingError);
  EXPECT_THROW(wire::decode_request(mutate(4, 2)), FramingError);
  EXPECT_THROW(wire::decode_request(mutate(5, 'q')), FramingError);
  EXPECT_THROW(wire::decode_request(mutate(6, 1)), FramingError);
  EXPECT_THROW(wire::decode_request(mutate(8, 0)), FramingError);
  EXPECT_THROW(wire::decode_request(std::span(good).first(10)), FramingError);
  EXPECT_THROW(wire::decode_request(std::span(good).first(good.size() - 1)), FramingError);
  auto longer = good;
  longer.push_back(0);
  EXPECT_THROW(wire::decode_request(longer), FramingError);
  auto huge = mutate(11, 0x01);  // H = 2 + 2^24
  EXPECT_THROW(wire::parse_header(huge), FramingError);
}

TEST(Wire, PayloadValueChecks) {
  Rng rng(5);
  auto b = wire::encode_request(request(rng, Role::inpaint, 2, 2));
  const float nan = std::nanf(""), two = 2.5f, neg = -0.25f;
  auto put = [&](std::size_t sample, float v) {
    auto c = b;
    std::memcpy(c.data() + 16 + 4 * sample, &v, 4);
    return c;
  };
  EXPECT_THROW(wire::decode_request(put(0, nan)), FramingError);
  EXPECT_THROW(wire::decode_request(put(1, two)), FramingError);
  EXPECT_THROW(wire::decode_request(put(2, neg)), FramingError);
  EXPECT_THROW(wire::decode_request(put(12, 0.5f)), FramingError);  // mask plane
  EXPECT_THROW(wire::decode_request(put(13, 3.0f)), FramingError);
  EXPECT_NO_THROW(wire::decode_request(put(13, 2.0f)));
}

TEST(Wire, ErrorFrames) {
  Rng rng(6);
  const GeneratorRequest r = request(rng, Role::segment, 2, 2);
  EXPECT_THROW(wire::decode_response(wire::encode_error(wire::ErrorCode::framing, "bad"), r), FramingError);
  try {
    wire::decode_response(wire::encode_error(wire::ErrorCode::generator, "boom"), r);
    FAIL();
  } catch (const FramingError&) {
    FAIL();
  } catch (const PeerError& e) {
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  EXPECT_THROW(wire::decode_request(wire::encode_error(wire::ErrorCode::framing, "x")), FramingError);
}

TEST(Wire, ResponseMustMatchRequest) {
  Rng rng(7);
  const GeneratorRequest r = request(rng, Role::segment, 2, 2);
  const GeneratorResponse res{r.image, SegMask(2, 2)};
  EXPECT_THROW(wire::decode_response(wire::encode_response(Role::inpaint, res), r), FramingError);
  const GeneratorRequest bigger = request(rng, Role::segment, 3, 2);
  EXPECT_THROW(wire::decode_response(wire::encode_response(Role::segment, res), bigger), FramingError);
}

TEST(Process, EchoPeerMatchesBuiltinIdentity) {
  Rng rng(8);
  const GeneratorHandle remote = open_endpoint("exec:" + std::string(FSG_PEER_PATH));
  const GeneratorHandle local = make_generator<mock::Identity>();
  for (Role role : {Role::reenact, Role::segment, Role::inpaint, Role::blend}) {
    const GeneratorRequest r = request(rng, role, 6, 5);
    const auto a = remote.call(r), b = local.call(r);
    EXPECT_EQ(std::vector<double>(a.image.data().begin(), a.image.data().end()),
              std::vector<double>(b.image.data().begin(), b.image.data().end()));
    EXPECT_EQ(a.mask, b.mask);
  }
}

TEST(Process, PeerReportsFramingErrors) {
  SubprocessTransport t(peer());
  std::vector<std::uint8_t> junk(16, 'Z');
  t.write_all(junk);
  t.close_write();
  const auto frame = t.read_frame();
  EXPECT_EQ(frame[5], 'e');
  EXPECT_THROW(wire::decode_response(frame, GeneratorRequest{}), FramingError);
}

TEST(Process, PeerHangupIsAPeerError) {
  const GeneratorHandle g = make_generator<RemoteGenerator>(
      std::make_unique<SubprocessTransport>(std::vector<std::string>{"/bin/true"}), "true");
  Rng rng(9);
  EXPECT_THROW(g.call(request(rng, Role::segment, 2, 2)), PeerError);
  EXPECT_THROW(g.call(request(rng, Role::segment, 2, 2)), PeerError);
}

TEST(Process, SilentPeerTimesOut) {
  const GeneratorHandle g = make_generator<RemoteGenerator>(
      std::make_unique<SubprocessTransport>(std::vector<std::string>{"/bin/sleep", "5"}, std::chrono::milliseconds(200)),
      "sleep");
  Rng rng(10);
  EXPECT_THROW(g.call(request(rng, Role::segment, 2, 2)), TimeoutError);
}

TEST(Process, EchoPeerOverTcp) {
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  const pid_t child = ::fork();
  if (child == 0) {
    ::execl(FSG_PEER_PATH, FSG_PEER_PATH, "--mode", "echo", "--listen", std::to_string(port).c_str(), nullptr);
    ::_exit(127);
  }
  GeneratorHandle g;
  for (int attempt = 0; attempt < 100 && !g.valid(); ++attempt) {
    try {
      g = open_endpoint("tcp:127.0.0.1:" + std::to_string(port));
    } catch (const PeerError&) {
      ::usleep(20000);
    }
  }
  ASSERT_TRUE(g.valid());
  Rng rng(11);
  const GeneratorRequest r = request(rng, Role::segment, 4, 4);
  EXPECT_EQ(g.call(r).image.data()[5], r.image.data()[5]);
  g = GeneratorHandle();
  ::kill(child, SIGKILL);
  ::waitpid(child, nullptr, 0);
}

TEST(Endpoint, Parsing) {
  EXPECT_EQ(open_endpoint("builtin:identity").name(), "identity");
  EXPECT_EQ(open_endpoint("builtin:fill").name(), "fill-inpaint");
  EXPECT_THROW(open_endpoint("builtin:nope"), InvalidArgument);
  EXPECT_THROW(open_endpoint("nope"), InvalidArgument);
  EXPECT_THROW(open_endpoint("tcp:host"), InvalidArgument);
  EXPECT_THROW(open_endpoint("exec:"), InvalidArgument);
}
