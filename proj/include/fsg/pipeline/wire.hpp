#pragma once

// Framed generator protocol.
//
// header (16 bytes, little-endian):
//   "FSGN" | u8 version = 1 | u8 role | u16 aux | u32 H | u32 W
// payload: (3 + aux) planes of H*W little-endian f32, image planes first.
//
// aux counts the planes after the image:
//   request  'r': N heatmap planes        'c': 1 mask plane
//            's': none                     'b': 3 target planes + 1 mask plane
//   response (same role as the request): 1 mask plane
// Mask planes hold labels 0 (background), 1 (face), 2 (hair) as f32.
//
// error frame: role 'e', aux = error code, H = message length, W = 0,
// payload = H bytes of UTF-8 text.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsg/pipeline/generator.hpp"

namespace fsg::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic{'F', 'S', 'G', 'N'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::uint32_t kMaxDim = 8192;
inline constexpr std::uint16_t kMaxHeatmapPlanes = 1024;
inline constexpr std::size_t kMaxPayload = std::size_t{1} << 32;
inline constexpr char kErrorRole = 'e';

enum class ErrorCode : std::uint16_t { framing = 1, generator = 2, unsupported = 3 };

struct FrameHeader {
  std::uint8_t version = kVersion;
  char role = 'r';
  std::uint16_t aux = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

inline void put_f32(std::vector<std::uint8_t>& b, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(b, bits);
}

inline float get_f32(const std::uint8_t* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

inline void put_header(std::vector<std::uint8_t>& b, const FrameHeader& h) {
  for (std::uint8_t m : kMagic) b.push_back(m);
  b.push_back(h.version);
  b.push_back(static_cast<std::uint8_t>(h.role));
  put_u16(b, h.aux);
  put_u32(b, h.height);
  put_u32(b, h.width);
}

inline void put_image_planes(std::vector<std::uint8_t>& b, const Image& img) {
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t i = 0; i < img.height(); ++i)
      for (std::size_t j = 0; j < img.width(); ++j) put_f32(b, img.at(i, j, c));
}

inline void put_mask_plane(std::vector<std::uint8_t>& b, const SegMask& m) {
  for (Label l : m.labels()) put_f32(b, static_cast<double>(static_cast<int>(l)));
}

// Cursor over a payload whose size has already been checked.
class PlaneReader {
 public:
  PlaneReader(std::span<const std::uint8_t> payload, std::size_t h, std::size_t w) : p_(payload), h_(h), w_(w) {}

  Image image(std::size_t channels, const char* what) {
    Image img(h_, w_, channels);
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < h_; ++i)
        for (std::size_t j = 0; j < w_; ++j) {
          const float v = next();
          if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw FramingError(std::string(what) + " plane holds a value outside [0, 1]");
          img.at(i, j, c) = v;
        }
    return img;
  }

  SegMask mask() {
    SegMask m(h_, w_);
    for (Label& l : m.labels()) {
      const float v = next();
      if (!(v == 0.0f || v == 1.0f || v == 2.0f)) throw FramingError("mask plane holds a value that is not a label");
      l = static_cast<Label>(static_cast<int>(v));
    }
    return m;
  }

  Heatmap heatmap(std::size_t channels) {
    Heatmap hm{channels, h_, w_, std::vector<float>(channels * h_ * w_)};
    for (float& v : hm.data) {
      v = next();
      if (!std::isfinite(v)) throw FramingError("heatmap plane holds a non-finite value");
    }
    return hm;
  }

 private:
  float next() {
    const float v = get_f32(p_.data() + off_);
    off_ += 4;
    return v;
  }

  std::span<const std::uint8_t> p_;
  std::size_t h_, w_;
  std::size_t off_ = 0;
};

}  // namespace detail

/// Planes after the image that a request of this role carries (nullopt for
/// roles whose count is variable).
inline std::optional<std::uint16_t> request_aux(char role) {
  switch (role) {
    case 's':
      return 0;
    case 'c':
      return 1;
    case 'b':
      return 4;
    default:
      return std::nullopt;
  }
}

inline bool is_role(char c) { return c == 'r' || c == 's' || c == 'c' || c == 'b'; }

/// Validates the fixed header; does not look at the payload.
inline FrameHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw FramingError("truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FramingError("bad magic");
  FrameHeader h;
  h.version = bytes[4];
  h.role = static_cast<char>(bytes[5]);
  h.aux = static_cast<std::uint16_t>(bytes[6] | bytes[7] << 8);
  h.height = detail::get_u32(bytes.data() + 8);
  h.width = detail::get_u32(bytes.data() + 12);
  if (h.version != kVersion) throw FramingError("unsupported version " + std::to_string(h.version));
  if (h.role == kErrorRole) {
    if (h.width != 0 || h.height > 65536) throw FramingError("malformed error frame");
    return h;
  }
  if (!is_role(h.role)) throw FramingError("unknown role byte " + std::to_string(static_cast<int>(bytes[5])));
  if (h.height == 0 || h.width == 0 || h.height > kMaxDim || h.width > kMaxDim)
    throw FramingError("raster dimensions out of range");
  if (h.role == 'r' && h.aux > kMaxHeatmapPlanes) throw FramingError("too many heatmap planes");
  return h;
}

inline std::size_t payload_size(const FrameHeader& h) {
  if (h.role == kErrorRole) return h.height;
  const std::size_t n = 4 * (3 + std::size_t{h.aux}) * h.height * h.width;
  if (n > kMaxPayload) throw FramingError("payload too large");
  return n;
}

/// Full request frame size for an H x W image with `aux` extra planes.
inline std::size_t frame_size(std::size_t aux, std::size_t h, std::size_t w) {
  return kHeaderSize + 4 * (3 + aux) * h * w;
}

inline std::vector<std::uint8_t> encode_request(const GeneratorRequest& req) {
  check_request(req);
  const Image& img = req.image;
  FrameHeader h;
  h.role = static_cast<char>(req.role);
  h.height = static_cast<std::uint32_t>(img.height());
  h.width = static_cast<std::uint32_t>(img.width());
  if (img.height() > kMaxDim || img.width() > kMaxDim) throw InvalidArgument("raster too large for the wire");
  if (req.role == Role::reenact) {
    if (req.heatmap->channels > kMaxHeatmapPlanes) throw InvalidArgument("too many heatmap planes for the wire");
    h.aux = static_cast<std::uint16_t>(req.heatmap->channels);
  } else {
    h.aux = *request_aux(h.role);
  }
  std::vector<std::uint8_t> b;
  b.reserve(frame_size(h.aux, img.height(), img.width()));
  detail::put_header(b, h);
  detail::put_image_planes(b, img);
  switch (req.role) {
    case Role::reenact:
      for (float v : req.heatmap->data) detail::put_f32(b, v);
      break;
    case Role::segment:
      break;
    case Role::blend:
      detail::put_image_planes(b, *req.target);
      [[fallthrough]];
    case Role::inpaint:
      detail::put_mask_plane(b, *req.mask);
      break;
  }
  return b;
}

inline GeneratorRequest decode_request(const FrameHeader& h, std::span<const std::uint8_t> payload) {
  if (h.role == kErrorRole) throw FramingError("expected a request, got an error frame");
  if (auto want = request_aux(h.role); want && *want != h.aux)
    throw FramingError("role '" + std::string(1, h.role) + "' carries " + std::to_string(*want) + " extra planes, not " +
                       std::to_string(h.aux));
  if (h.role == 'r' && h.aux == 0) throw FramingError("reenactment request without heatmap planes");
  if (payload.size() != payload_size(h)) throw FramingError("payload length does not match the header");
  detail::PlaneReader rd(payload, h.height, h.width);
  GeneratorRequest req;
  req.role = static_cast<Role>(h.role);
  req.image = rd.image(3, "image");
  switch (req.role) {
    case Role::reenact:
      req.heatmap = rd.heatmap(h.aux);
      break;
    case Role::segment:
      break;
    case Role::blend:
      req.target = rd.image(3, "target");
      [[fallthrough]];
    case Role::inpaint:
      req.mask = rd.mask();
      break;
  }
  return req;
}

inline std::vector<std::uint8_t> encode_response(Role role, const GeneratorResponse& res) {
  FrameHeader h;
  h.role = static_cast<char>(role);
  h.aux = 1;
  h.height = static_cast<std::uint32_t>(res.image.height());
  h.width = static_cast<std::uint32_t>(res.image.width());
  std::vector<std::uint8_t> b;
  b.reserve(frame_size(1, res.image.height(), res.image.width()));
  detail::put_header(b, h);
  detail::put_image_planes(b, res.image);
  detail::put_mask_plane(b, res.mask);
  return b;
}

inline std::vector<std::uint8_t> encode_error(ErrorCode code, std::string message) {
  if (message.size() > 65536) message.resize(65536);
  FrameHeader h;
  h.role = kErrorRole;
  h.aux = static_cast<std::uint16_t>(code);
  h.height = static_cast<std::uint32_t>(message.size());
  std::vector<std::uint8_t> b;
  detail::put_header(b, h);
  b.insert(b.end(), message.begin(), message.end());
  return b;
}

/// Turns a received error frame into the matching exception.
[[noreturn]] inline void raise_error_frame(const FrameHeader& h, std::span<const std::uint8_t> payload) {
  const std::string msg(payload.begin(), payload.end());
  if (h.aux == static_cast<std::uint16_t>(ErrorCode::framing)) throw FramingError("peer rejected the frame: " + msg);
  throw PeerError("peer reported error " + std::to_string(h.aux) + ": " + msg);
}

inline GeneratorResponse decode_response(const FrameHeader& h, std::span<const std::uint8_t> payload,
                                         const GeneratorRequest& req) {
  if (h.role == kErrorRole) raise_error_frame(h, payload);
  if (h.role != static_cast<char>(req.role)) throw FramingError("response role does not match the request");
  if (h.aux != 1) throw FramingError("response must carry exactly one mask plane");
  if (h.height != req.image.height() || h.width != req.image.width())
    throw FramingError("response dimensions do not match the request");
  if (payload.size() != payload_size(h)) throw FramingError("payload length does not match the header");
  detail::PlaneReader rd(payload, h.height, h.width);
  GeneratorResponse res;
  res.image = rd.image(3, "image");
  res.mask = rd.mask();
  return res;
}

namespace detail {
inline std::pair<FrameHeader, std::span<const std::uint8_t>> split(std::span<const std::uint8_t> frame) {
  const FrameHeader h = parse_header(frame);
  const auto body = frame.subspan(kHeaderSize);
  if (body.size() < payload_size(h)) throw FramingError("truncated payload");
  if (body.size() > payload_size(h)) throw FramingError("trailing bytes after the payload");
  return {h, body};
}
}  // namespace detail

/// Whole-frame conveniences.
inline GeneratorRequest decode_request(std::span<const std::uint8_t> frame) {
  auto [h, body] = detail::split(frame);
  return decode_request(h, body);
}

inline GeneratorResponse decode_response(std::span<const std::uint8_t> frame, const GeneratorRequest& req) {
  auto [h, body] = detail::split(frame);
  return decode_response(h, body, req);
}

}  // namespace fsg::wire
