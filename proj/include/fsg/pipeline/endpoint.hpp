#pragma once

// Endpoint strings naming a generator:
//   builtin:identity | builtin:identity-keyed | builtin:mean | builtin:warp
//   builtin:fill | builtin:poisson
//   exec:<program> [args...]   (wire protocol over the child's stdin/stdout)
//   tcp:<host>:<port>

#include <sstream>
#include <string>
#include <vector>

#include "fsg/pipeline/mocks.hpp"
#include "fsg/pipeline/process.hpp"

namespace fsg {

struct EndpointOptions {
  std::uint64_t seed = 0;
  std::chrono::milliseconds timeout = kDefaultTimeout;
  BlendOptions blend;
  bool hair_free = false;
};

inline GeneratorHandle open_endpoint(const std::string& spec, const EndpointOptions& opt = {}) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidArgument("endpoint '" + spec + "' has no scheme");
  const std::string scheme = spec.substr(0, colon), rest = spec.substr(colon + 1);
  if (scheme == "builtin") {
    if (rest == "identity") return make_generator<mock::Identity>(mock::MaskPolicy::full);
    if (rest == "identity-keyed") return make_generator<mock::Identity>(mock::MaskPolicy::keyed);
    if (rest == "mean") return make_generator<mock::MeanColor>();
    if (rest == "warp") return make_generator<mock::Warp>(mock::MaskPolicy::keyed);
    if (rest == "fill") return make_generator<mock::FillInpaint>(opt.seed);
    if (rest == "poisson") return make_generator<mock::PoissonBlend>(opt.blend, opt.hair_free);
    throw InvalidArgument("unknown builtin generator '" + rest + "'");
  }
  if (scheme == "exec") {
    std::istringstream in(rest);
    std::vector<std::string> argv;
    for (std::string a; in >> a;) argv.push_back(a);
    if (argv.empty()) throw InvalidArgument("exec endpoint without a program");
    return make_generator<RemoteGenerator>(std::make_unique<SubprocessTransport>(argv, opt.timeout), spec);
  }
  if (scheme == "tcp") {
    const auto c = rest.rfind(':');
    if (c == std::string::npos || c == 0 || c + 1 == rest.size())
      throw InvalidArgument("tcp endpoint must be tcp:<host>:<port>");
    return make_generator<RemoteGenerator>(
        std::make_unique<TcpTransport>(rest.substr(0, c), rest.substr(c + 1), opt.timeout), spec);
  }
  throw InvalidArgument("unknown endpoint scheme '" + scheme + "'");
}

}  // namespace fsg
