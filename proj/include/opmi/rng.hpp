#pragma once

// Counter-derived random streams.
//
// Every random quantity in an experiment is drawn from a stream derived from
// (master seed, path), where the path names the draw's role, e.g.
// {repeat, p-index, arm, trial}. A stream depends on nothing but its
// (seed, path), so trials can run on any worker in any order and still
// reproduce bit-for-bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace opmi {

namespace detail {

// Ziggurat tables (Marsaglia & Tsang layout, Doornik's double-precision
// formulation). Layer 0 is the base strip including the tail.
inline constexpr int kZigguratLayers = 128;
inline constexpr double kZigguratTailStart = 3.442619855899;

struct ZigguratTables {
  std::array<double, kZigguratLayers + 1> x{};
  std::array<double, kZigguratLayers> ratio{};
  ZigguratTables();
};

extern const ZigguratTables kZiggurat;

// xoshiro256++ (Blackman & Vigna), state expanded from one 64-bit seed with
// splitmix64.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;
  explicit Xoshiro256pp(std::uint64_t seed);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace detail

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t state_seed) : engine_(state_seed) {}

  static constexpr result_type min() { return detail::Xoshiro256pp::min(); }
  static constexpr result_type max() { return detail::Xoshiro256pp::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  // Standard normal via a 128-layer ziggurat.
  double normal() {
    const auto& t = detail::kZiggurat;
    const std::uint64_t bits = engine_();
    const int layer = static_cast<int>(bits & 0x7f);
    // Bits 11..63 give u in (-1, 1); bits 0..6 pick the layer.
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    if (std::fabs(u) < t.ratio[layer]) return u * t.x[layer];
    return normal_slow(layer, u);
  }
  // Chi-square with `dof` degrees of freedom (sum of dof squared normals in
  // distribution).
  double chi_square(double dof);

  template <typename Range>
  void fill_normal(Range&& out) {
    for (auto& v : out) v = normal();
  }

 private:
  double normal_slow(int layer, double u);
  double normal_tail(bool negative);

  detail::Xoshiro256pp engine_;
};

RngStream derive_stream(std::uint64_t master_seed, std::span<const std::uint64_t> path);
inline RngStream derive_stream(std::uint64_t master_seed,
                               std::initializer_list<std::uint64_t> path) {
  return derive_stream(master_seed, std::span<const std::uint64_t>(path.begin(), path.size()));
}

std::vector<double> standard_normal(RngStream& stream, std::size_t count);

}  // namespace opmi
