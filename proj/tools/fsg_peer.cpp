// Reference generator peer: speaks the wire protocol on stdin/stdout, or on a
// TCP port with --listen. Modes: echo (identity) or warp (thin-plate landmark
// warp of synthetic faces).

#include <cstdio>
#include <iostream>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "fsg/pipeline/mocks.hpp"
#include "fsg/pipeline/process.hpp"

namespace {

using namespace fsg;

// Serves one stream until the client hangs up (0) or sends garbage (1).
int serve(FdTransport& t, const GeneratorHandle& echo, const GeneratorHandle& warp) {
  for (;;) {
    std::vector<std::uint8_t> head(wire::kHeaderSize);
    try {
      t.read_exact(std::span(head).first(1));
    } catch (const PeerError&) {
      return 0;
    }
    GeneratorRequest req;
    try {
      try {
        t.read_exact(std::span(head).subspan(1));
      } catch (const TimeoutError&) {
        throw;
      } catch (const PeerError&) {
        throw FramingError("truncated header");
      }
      const wire::FrameHeader h = wire::parse_header(head);
      if (h.role == wire::kErrorRole) throw FramingError("error frames are not requests");
      std::vector<std::uint8_t> body(wire::payload_size(h));
      try {
        t.read_exact(body);
      } catch (const TimeoutError&) {
        throw;
      } catch (const PeerError&) {
        throw FramingError("stream ended inside a frame");
      }
      req = wire::decode_request(h, body);
    } catch (const FramingError& e) {
      t.write_all(wire::encode_error(wire::ErrorCode::framing, e.what()));
      return 1;
    } catch (const PeerError&) {
      return 1;
    }
    try {
      const GeneratorHandle& g = req.role == Role::reenact ? warp : echo;
      t.write_all(wire::encode_response(req.role, g.call(req)));
    } catch (const PeerError&) {
      return 1;
    } catch (const std::exception& e) {
      t.write_all(wire::encode_error(wire::ErrorCode::generator, e.what()));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsg reference generator peer"};
  std::string mode = "echo", mask = "full";
  int port = 0;
  app.add_option("--mode", mode, "echo or warp")->check(CLI::IsMember({"echo", "warp"}));
  app.add_option("--mask", mask, "mask policy: full or keyed")->check(CLI::IsMember({"full", "keyed"}));
  app.add_option("--listen", port, "serve TCP on 127.0.0.1:PORT instead of stdin/stdout");
  CLI11_PARSE(app, argc, argv);

  const auto policy = mask == "keyed" ? mock::MaskPolicy::keyed : mock::MaskPolicy::full;
  const GeneratorHandle echo = make_generator<mock::Identity>(policy);
  const GeneratorHandle warp = mode == "warp" ? make_generator<mock::Warp>(policy) : echo;
  const std::chrono::milliseconds forever{-1};

  if (port == 0) {
    FdTransport t(STDIN_FILENO, STDOUT_FILENO, forever, false);
    return serve(t, echo, warp);
  }
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(srv, 4) != 0) {
    std::perror("fsg_peer: listen");
    return 2;
  }
  for (;;) {
    const int fd = ::accept(srv, nullptr, nullptr);
    if (fd < 0) continue;
    FdTransport t(fd, fd, forever, true);
    serve(t, echo, warp);
  }
}
