#pragma once

// Gradient-domain blending:
//   f = argmin ||grad f - grad I_r^t||^2   s.t.  f = I_t where the mask is constrained.
//
// With forward differences the minimizer satisfies, at every free pixel p,
//   deg(p) f_p - sum_{q ~ p} f_q = deg(p) s_p - sum_{q ~ p} s_q
// where q ranges over in-image 4-neighbours and constrained f_q are Dirichlet
// data. In the interior deg(p) = 4 and this is the discrete Poisson equation
// Lap f = Lap I_r^t; at the image border it is the natural (Neumann) boundary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fsg/core.hpp"

namespace fsg {

struct Gradient {
  Image gx;  // I(i, j+1) - I(i, j), zero on the last column
  Image gy;  // I(i+1, j) - I(i, j), zero on the last row
};

inline Gradient discrete_gradient(const Image& img) {
  if (img.height() < 2 || img.width() < 2) throw InvalidArgument("gradient needs at least a 2x2 image");
  Gradient g{Image(img.height(), img.width(), img.channels()), Image(img.height(), img.width(), img.channels())};
  for (std::size_t i = 0; i < img.height(); ++i)
    for (std::size_t j = 0; j < img.width(); ++j)
      for (std::size_t c = 0; c < img.channels(); ++c) {
        if (j + 1 < img.width()) g.gx.at(i, j, c) = img.at(i, j + 1, c) - img.at(i, j, c);
        if (i + 1 < img.height()) g.gy.at(i, j, c) = img.at(i + 1, j, c) - img.at(i, j, c);
      }
  return g;
}

/// ||grad f - grad s||^2 summed over channels.
inline double gradient_energy(const Image& f, const Image& s) {
  const Gradient a = discrete_gradient(f), b = discrete_gradient(s);
  double e = 0.0;
  for (std::size_t i = 0; i < a.gx.size(); ++i) {
    const double dx = a.gx.data()[i] - b.gx.data()[i];
    const double dy = a.gy.data()[i] - b.gy.data()[i];
    e += dx * dx + dy * dy;
  }
  return e;
}

/// 4-neighbour Laplacian sum_q (I_q - I_p) at an interior pixel.
inline double laplacian_at(const Image& img, std::size_t i, std::size_t j, std::size_t c) {
  return img.at(i - 1, j, c) + img.at(i + 1, j, c) + img.at(i, j - 1, c) + img.at(i, j + 1, c) - 4.0 * img.at(i, j, c);
}

struct BlendProblem {
  Image target;                     // I_t, Dirichlet data
  Image source;                     // I_r^t, gradient guide
  std::vector<std::uint8_t> free;   // per pixel: 1 = unknown, 0 = fixed to target
};

/// Free pixels are the face class, plus hair when `hair_free`.
inline std::vector<std::uint8_t> free_mask(const SegMask& m, bool hair_free = false) {
  std::vector<std::uint8_t> out(m.size(), 0);
  auto labels = m.labels();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = labels[i] == Label::face || (hair_free && labels[i] == Label::hair);
  return out;
}

enum class SolverMethod { automatic, direct, conjugate_gradient };

inline std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::direct:
      return "direct";
    case SolverMethod::conjugate_gradient:
      return "conjugate-gradient";
    default:
      return "automatic";
  }
}

struct SolverReport {
  SolverMethod method = SolverMethod::direct;
  std::size_t free_pixels = 0;
  std::size_t iterations = 0;             // max over channels
  double residual = 0.0;                  // max over channels, L2
  std::vector<double> channel_residuals;
  std::vector<std::size_t> channel_iterations;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SolverReport report)
      : Error(ErrorKind::convergence, what), report_(std::move(report)) {}
  const SolverReport& report() const noexcept { return report_; }

 private:
  SolverReport report_;
};

struct BlendOptions {
  double tol = 1e-6;
  std::optional<std::size_t> max_iter;  // default 10 sqrt(free) + 1000
  SolverMethod method = SolverMethod::automatic;
  std::size_t direct_limit = 4096;      // automatic picks direct below this many free pixels
};

struct BlendResult {
  Image image;     // clamped to [0, 1]
  Image solution;  // exact minimizer before clamping
  SolverReport report;
};

namespace detail {

// Free-pixel linear system for one problem; shared by all channels.
class PoissonSystem {
 public:
  PoissonSystem(std::size_t h, std::size_t w, const std::vector<std::uint8_t>& free) : h_(h), w_(w) {
    index_.assign(h * w, -1);
    for (std::size_t p = 0; p < h * w; ++p)
      if (free[p]) {
        index_[p] = static_cast<std::int64_t>(pixels_.size());
        pixels_.push_back(p);
      }
    diag_.resize(pixels_.size());
    nbrs_.resize(pixels_.size());
    for (std::size_t u = 0; u < pixels_.size(); ++u) {
      const std::size_t p = pixels_[u];
      const std::size_t i = p / w, j = p % w;
      auto& nb = nbrs_[u];
      if (i > 0) nb.push_back(p - w);
      if (i + 1 < h) nb.push_back(p + w);
      if (j > 0) nb.push_back(p - 1);
      if (j + 1 < w) nb.push_back(p + 1);
      diag_[u] = static_cast<double>(nb.size());
    }
  }

  std::size_t unknowns() const noexcept { return pixels_.size(); }
  std::size_t pixel(std::size_t u) const noexcept { return pixels_[u]; }

  Eigen::VectorXd rhs(const Image& target, const Image& source, std::size_t c) const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(unknowns()));
    const std::size_t C = target.channels();
    auto t = target.data();
    auto s = source.data();
    for (std::size_t u = 0; u < unknowns(); ++u) {
      const std::size_t p = pixels_[u];
      double v = 0.0;
      for (std::size_t q : nbrs_[u]) {
        v += s[p * C + c] - s[q * C + c];
        if (index_[q] < 0) v += t[q * C + c];
      }
      b[static_cast<Eigen::Index>(u)] = v;
    }
    return b;
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(x.size());
    for (std::size_t u = 0; u < unknowns(); ++u) {
      double v = diag_[u] * x[static_cast<Eigen::Index>(u)];
      for (std::size_t q : nbrs_[u])
        if (index_[q] >= 0) v -= x[index_[q]];
      y[static_cast<Eigen::Index>(u)] = v;
    }
  }

  double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
    Eigen::VectorXd ax;
    apply(x, ax);
    return (b - ax).norm();
  }

  Eigen::SparseMatrix<double> matrix() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t u = 0; u < unknowns(); ++u) {
      const auto row = static_cast<Eigen::Index>(u);
      trip.emplace_back(row, row, diag_[u]);
      for (std::size_t q : nbrs_[u])
        if (index_[q] >= 0) trip.emplace_back(row, index_[q], -1.0);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(unknowns()), static_cast<Eigen::Index>(unknowns()));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
  }

  // Jacobi-preconditioned conjugate gradient. Stops on the true residual.
  std::size_t solve_cg(const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, std::size_t max_iter) const {
    Eigen::VectorXd r, ap, z, p;
    apply(x, ap);
    r = b - ap;
    std::size_t it = 0;
    // the recurrence residual can drift from b - Ax; restart from the true one
    for (int restart = 0; restart < 8 && it < max_iter && r.norm() > tol; ++restart) {
      z = r.cwiseQuotient(diag());
      p = z;
      double rz = r.dot(z);
      while (it < max_iter && r.norm() > tol) {
        apply(p, ap);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        ++it;
        z = r.cwiseQuotient(diag());
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
      }
      apply(x, ap);
      r = b - ap;
    }
    return it;
  }

 private:
  Eigen::VectorXd diag() const {
    return Eigen::Map<const Eigen::VectorXd>(diag_.data(), static_cast<Eigen::Index>(diag_.size()));
  }

  std::size_t h_, w_;
  std::vector<std::int64_t> index_;
  std::vector<std::size_t> pixels_;
  std::vector<double> diag_;
  std::vector<std::vector<std::size_t>> nbrs_;
};

}  // namespace detail

inline BlendResult blend(const BlendProblem& prob, const BlendOptions& opt = {}) {
  const Image& t = prob.target;
  const Image& s = prob.source;
  if (!t.same_shape(s)) throw InvalidArgument("target and source rasters differ in shape");
  if (prob.free.size() != t.pixels()) throw InvalidArgument("blend mask does not match the raster size");
  if (!(opt.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  require_valid(t, "blend target");
  require_valid(s, "blend source");

  BlendResult res;
  res.solution = t;
  detail::PoissonSystem sys(t.height(), t.width(), prob.free);
  const std::size_t n = sys.unknowns();
  SolverReport& rep = res.report;
  rep.free_pixels = n;
  rep.method = opt.method == SolverMethod::automatic
                   ? (n < opt.direct_limit ? SolverMethod::direct : SolverMethod::conjugate_gradient)
                   : opt.method;

  if (n == t.pixels()) {
    // no Dirichlet data: the energy is minimized (to zero) by the guide itself
    res.solution = s;
    rep.channel_residuals.assign(t.channels(), 0.0);
    rep.channel_iterations.assign(t.channels(), 0);
    res.image = clamp01(res.solution);
    return res;
  }

  const std::size_t max_iter =
      opt.max_iter.value_or(static_cast<std::size_t>(10.0 * std::sqrt(static_cast<double>(n))) + 1000);
  std::optional<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt;
  if (n > 0 && rep.method == SolverMethod::direct) {
    ldlt.emplace(sys.matrix());
    if (ldlt->info() != Eigen::Success) throw ConvergenceError("sparse factorization failed", rep);
  }

  const std::size_t C = t.channels();
  for (std::size_t c = 0; c < C; ++c) {
    if (n == 0) {
      rep.channel_residuals.push_back(0.0);
      rep.channel_iterations.push_back(0);
      continue;
    }
    const Eigen::VectorXd b = sys.rhs(t, s, c);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    std::size_t iters = 0;
    if (rep.method == SolverMethod::direct) {
      x = ldlt->solve(b);
      iters = 1;
      // a couple of refinement sweeps recover digits lost in the factorization
      for (int k = 0; k < 2 && sys.residual(x, b) > opt.tol; ++k) {
        Eigen::VectorXd ax;
        sys.apply(x, ax);
        x += ldlt->solve(b - ax);
        ++iters;
      }
    } else {
      for (std::size_t u = 0; u < n; ++u) x[static_cast<Eigen::Index>(u)] = s.data()[sys.pixel(u) * C + c];
      iters = sys.solve_cg(b, x, opt.tol, max_iter);
    }
    const double r = sys.residual(x, b);
    rep.channel_residuals.push_back(r);
    rep.channel_iterations.push_back(iters);
    rep.iterations = std::max(rep.iterations, iters);
    rep.residual = std::max(rep.residual, r);
    for (std::size_t u = 0; u < n; ++u) res.solution.data()[sys.pixel(u) * C + c] = x[static_cast<Eigen::Index>(u)];
  }
  if (!(rep.residual <= opt.tol))
    throw ConvergenceError("Poisson solve did not reach tolerance " + std::to_string(opt.tol) + " (residual " +
                               std::to_string(rep.residual) + ")",
                           rep);
  res.image = clamp01(res.solution);
  return res;
}

}  // namespace fsg
