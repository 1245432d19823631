#include "ofsmpc/rng.hpp"

#include <cmath>
#include <numbers>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), index_(stream_index), key_(mix64(mix64(seed) ^ mix64(stream_index + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vec RngStream::standard_normal(Eigen::Index n) {
  Vec z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = standard_normal();
  return z;
}

Vec gaussian_draw(RngStream& rng, const Vec& mean, const Mat& cov) {
  return GaussianSampler(mean, cov).draw(rng);
}

GaussianSampler::GaussianSampler(Vec mean, const Mat& cov) : mean_(std::move(mean)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size()) {
    throw DimensionError("GaussianSampler: covariance dimension");
  }
  factor_ = psd_factor(make_symmetric(cov, "covariance"));
}

Vec GaussianSampler::draw(RngStream& rng) const {
  return mean_ + factor_ * rng.standard_normal(mean_.size());
}

Vec GaussianSampler::draw_zero_mean(RngStream& rng) const {
  return factor_ * rng.standard_normal(mean_.size());
}

}  // namespace ofsmpc
