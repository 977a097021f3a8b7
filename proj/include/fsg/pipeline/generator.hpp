#pragma once

// The contract shared by the four generator roles: an image (plus role-specific
// conditioning) goes in, an image and a segmentation mask come out.

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fsg/core.hpp"
#include "fsg/heatmaps.hpp"

namespace fsg {

enum class Role : char {
  reenact = 'r',  // G_r: image + landmark heatmap
  segment = 's',  // G_s: image
  inpaint = 'c',  // G_c: image + target face mask
  blend = 'b',    // G_b: transferred image + target image + target mask
};

inline std::string role_name(Role r) { return std::string(1, static_cast<char>(r)); }

/// Conditioning depends on the role: `heatmap` for reenact, `mask` for inpaint,
/// `target` and `mask` for blend.
struct GeneratorRequest {
  Role role = Role::reenact;
  Image image;
  std::optional<Heatmap> heatmap;
  std::optional<Image> target;
  std::optional<SegMask> mask;
};

struct GeneratorResponse {
  Image image;
  SegMask mask;
};

inline void check_request(const GeneratorRequest& req) {
  if (req.image.channels() != 3) throw InvalidArgument("generator requests carry 3-channel images");
  require_valid(req.image, "generator request image");
  const auto h = req.image.height(), w = req.image.width();
  switch (req.role) {
    case Role::reenact:
      if (!req.heatmap) throw InvalidArgument("reenactment request needs a heatmap");
      if (req.heatmap->height != h || req.heatmap->width != w)
        throw InvalidArgument("heatmap dimensions do not match the image");
      break;
    case Role::segment:
      break;
    case Role::blend:
      if (!req.target || !req.target->same_shape(req.image))
        throw InvalidArgument("blend request needs a target image of matching shape");
      [[fallthrough]];
    case Role::inpaint:
      if (!req.mask || req.mask->height() != h || req.mask->width() != w)
        throw InvalidArgument("request needs a mask matching the image");
      break;
  }
}

/// Generator outputs travel as f32; builtin and remote generators alike are
/// held to that precision.
inline void quantize_f32(Image& img) {
  for (double& v : img.data()) v = static_cast<double>(static_cast<float>(v));
}

class Generator {
 public:
  virtual ~Generator() = default;
  virtual GeneratorResponse run(const GeneratorRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Shared, copyable handle to a generator. Requests through one handle are
/// serialized; responses are checked against the contract and rounded to f32
/// before returning.
class GeneratorHandle {
 public:
  GeneratorHandle() = default;
  explicit GeneratorHandle(std::shared_ptr<Generator> gen)
      : gen_(std::move(gen)), lock_(std::make_shared<std::mutex>()) {}

  bool valid() const noexcept { return static_cast<bool>(gen_); }
  std::string name() const { return gen_ ? gen_->name() : "<none>"; }
  Generator* get() const noexcept { return gen_.get(); }

  GeneratorResponse call(const GeneratorRequest& req) const {
    if (!gen_) throw InvalidArgument("generator handle is empty");
    check_request(req);
    GeneratorResponse res;
    {
      std::lock_guard guard(*lock_);
      res = gen_->run(req);
    }
    quantize_f32(res.image);
    if (!res.image.same_shape(req.image))
      throw ProtocolError("generator '" + name() + "' returned an image of the wrong shape");
    if (!is_valid(res.image)) throw ProtocolError("generator '" + name() + "' returned an invalid image");
    if (res.mask.height() != req.image.height() || res.mask.width() != req.image.width())
      throw ProtocolError("generator '" + name() + "' returned a mask of the wrong shape");
    return res;
  }

 private:
  std::shared_ptr<Generator> gen_;
  std::shared_ptr<std::mutex> lock_;
};

template <class G, class... Args>
GeneratorHandle make_generator(Args&&... args) {
  return GeneratorHandle(std::make_shared<G>(std::forward<Args>(args)...));
}

}  // namespace fsg
