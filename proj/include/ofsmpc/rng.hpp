#pragma once

#include <cstdint>

#include "ofsmpc/mat_core.hpp"

namespace ofsmpc {

/// Counter-based generator: draw j of stream (seed, index) is a pure function
/// of (seed, index, j), so runs can be scheduled on any thread.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Box-Muller; the second value of each pair is kept for the next call.
  double standard_normal();
  Vec standard_normal(Eigen::Index n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// mean + F z with F F^T = cov (PSD factor, zero pivots allowed).
Vec gaussian_draw(RngStream& rng, const Vec& mean, const Mat& cov);

/// Same distribution as gaussian_draw with the factor computed once.
class GaussianSampler {
 public:
  GaussianSampler(Vec mean, const Mat& cov);
  Vec draw(RngStream& rng) const;
  Vec draw_zero_mean(RngStream& rng) const;
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vec mean_;
  Mat factor_;
};

}  // namespace ofsmpc
