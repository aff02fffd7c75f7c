#include "wlqc/rng.hpp"

#include <cmath>

namespace wlqc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void Philox4x32::refill() {
  std::uint32_t c0 = static_cast<std::uint32_t>(index_);
  std::uint32_t c1 = static_cast<std::uint32_t>(index_ >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
  std::uint32_t k0 = key0_, k1 = key1_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c0, hi0, lo0);
    mulhilo(kPhiloxM1, c2, hi1, lo1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  block_[0] = c0;
  block_[1] = c1;
  block_[2] = c2;
  block_[3] = c3;
  ++index_;
  pos_ = 0;
}

std::uint32_t Philox4x32::next_u32() {
  if (pos_ >= 4) refill();
  return block_[pos_++];
}

std::uint64_t Philox4x32::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Philox4x32::uniform01() {
  const std::uint64_t bits = (next_u64() >> 11) + 1;  // in [1, 2^53]
  return static_cast<double>(bits) * 0x1.0p-53;
}

double Philox4x32::uniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
}

double Philox4x32::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd Philox4x32::normal_vector(int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal();
  return v;
}

std::uint64_t Philox4x32::uniform_index(std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny compared to 2^64.
  return next_u64() % n;
}

}  // namespace wlqc
