#include "opmi/rng.hpp"

#include <array>
#include <cmath>

namespace opmi {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

namespace detail {

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  for (auto& word : s_) {
    seed += kGolden;
    word = splitmix64(seed);
  }
}

ZigguratTables::ZigguratTables() {
  constexpr double kLayerArea = 9.91256303526217e-3;
  double f = std::exp(-0.5 * kZigguratTailStart * kZigguratTailStart);
  x[0] = kLayerArea / f;
  x[1] = kZigguratTailStart;
  x[kZigguratLayers] = 0.0;
  for (int i = 2; i < kZigguratLayers; ++i) {
    x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
    f = std::exp(-0.5 * x[i] * x[i]);
  }
  for (int i = 0; i < kZigguratLayers; ++i) ratio[i] = x[i + 1] / x[i];
}

const ZigguratTables kZiggurat;

}  // namespace detail

RngStream derive_stream(std::uint64_t master_seed, std::span<const std::uint64_t> path) {
  std::uint64_t h = splitmix64(master_seed);
  std::uint64_t position = 0;
  for (std::uint64_t component : path) {
    ++position;
    h = splitmix64(h ^ splitmix64(component + position * kGolden));
  }
  h = splitmix64(h ^ path.size());
  return RngStream(h);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = max() - (max() % bound + 1) % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r > limit);
  return r % bound;
}

double RngStream::normal_tail(bool negative) {
  double x, y;
  do {
    x = std::log(uniform()) / detail::kZigguratTailStart;
    y = std::log(uniform());
  } while (-2.0 * y < x * x);
  return negative ? x - detail::kZigguratTailStart : detail::kZigguratTailStart - x;
}

double RngStream::normal_slow(int layer, double u) {
  const auto& t = detail::kZiggurat;
  for (;;) {
    if (layer == 0) return normal_tail(u < 0.0);
    const double x = u * t.x[layer];
    const double f0 = std::exp(-0.5 * (t.x[layer] * t.x[layer] - x * x));
    const double f1 = std::exp(-0.5 * (t.x[layer + 1] * t.x[layer + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    const std::uint64_t bits = engine_();
    layer = static_cast<int>(bits & 0x7f);
    u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    if (std::fabs(u) < t.ratio[layer]) return u * t.x[layer];
  }
}

double RngStream::chi_square(double dof) {
  if (dof <= 0.0) return 0.0;
  std::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  return gamma(*this);
}

std::vector<double> standard_normal(RngStream& stream, std::size_t count) {
  std::vector<double> out(count);
  stream.fill_normal(out);
  return out;
}

}  // namespace opmi
