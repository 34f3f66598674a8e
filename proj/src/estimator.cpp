#include "opmi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opmi/theory.hpp"

namespace opmi {
namespace {

std::size_t bin_of(double v, double lo, double hi, int bins) {
  const double pos = (v - lo) / (hi - lo) * bins;
  if (pos <= 0.0) return 0;
  const auto idx = static_cast<std::size_t>(pos);
  return std::min(idx, static_cast<std::size_t>(bins - 1));
}

PosteriorHistogram histogram_on(std::span<const double> samples, double lo, double hi, int bins) {
  PosteriorHistogram h{lo, hi, std::vector<double>(bins, 0.0)};
  for (double v : samples) h.pmf[bin_of(v, lo, hi, bins)] += 1.0;
  const double total = static_cast<double>(samples.size());
  for (double& mass : h.pmf) mass /= total;
  return h;
}

}  // namespace

HistogramPair build_histogram_pair(std::span<const double> samples0,
                                   std::span<const double> samples1, int bins) {
  if (samples0.empty() || samples1.empty()) {
    throw std::invalid_argument("build_histogram_pair: empty sample set");
  }
  if (bins < 2) throw std::invalid_argument("build_histogram_pair: bins must be >= 2");

  double lo = samples0.front();
  double hi = samples0.front();
  for (auto set : {samples0, samples1}) {
    for (double v : set) {
      if (!std::isfinite(v)) throw std::invalid_argument("build_histogram_pair: non-finite sample");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    const double eps = std::max(1e-12, 1e-9 * std::fabs(lo));
    lo -= eps;
    hi += eps;
  }
  return {histogram_on(samples0, lo, hi, bins), histogram_on(samples1, lo, hi, bins)};
}

double histogram_advantage(const HistogramPair& pair) {
  double adv = 0.0;
  for (std::size_t i = 0; i < pair.h0.pmf.size(); ++i) {
    adv += std::max(0.0, pair.h1.pmf[i] - pair.h0.pmf[i]);
  }
  return std::clamp(adv, 0.0, 1.0);
}

double histogram_rule_advantage(const HistogramPair& pair, std::span<const double> samples0,
                                std::span<const double> samples1) {
  const int bins = static_cast<int>(pair.h0.pmf.size());
  auto guesses_member = [&](double v) {
    if (v < pair.h0.lo || v > pair.h0.hi) return false;
    const auto b = bin_of(v, pair.h0.lo, pair.h0.hi, bins);
    return pair.h1.pmf[b] > pair.h0.pmf[b];
  };
  double tp = 0.0, fp = 0.0;
  for (double v : samples1) tp += guesses_member(v) ? 1.0 : 0.0;
  for (double v : samples0) fp += guesses_member(v) ? 1.0 : 0.0;
  return tp / static_cast<double>(samples1.size()) - fp / static_cast<double>(samples0.size());
}

int threshold_adversary(double sigma0_sq, double sigma1_sq, double y_hat) {
  const double alpha = lrt_threshold(sigma0_sq, sigma1_sq);
  const bool outside = y_hat * y_hat > alpha * alpha;
  return sigma1_sq > sigma0_sq ? (outside ? 1 : 0) : (y_hat * y_hat < alpha * alpha ? 1 : 0);
}

double advantage_from_threshold(double sigma0_sq, double sigma1_sq) {
  return advantage_point(sigma0_sq, sigma1_sq);
}

}  // namespace opmi
