#pragma once

// Histogram estimate of the two output posteriors and the advantage of the
// adversary that picks the arm with the larger estimated mass in each bin.

#include <span>

#include "opmi/core.hpp"

namespace opmi {

// Histograms for the two arms on one shared grid of equal-width bins.
struct HistogramPair {
  PosteriorHistogram h0;  // m = 0
  PosteriorHistogram h1;  // m = 1
};

// Recommended minimum trials per arm; below it the estimate is biased.
inline constexpr int kMinSamplesPerArm = 10000;

// Range is [min, max] over both sample sets, bins are [e_i, e_{i+1}) with
// the last bin closed. An all-equal range v is widened to v +/- max(1e-12, 1e-9 |v|).
// Throws std::invalid_argument on empty input, bins < 2, or non-finite samples.
HistogramPair build_histogram_pair(std::span<const double> samples0,
                                   std::span<const double> samples1, int bins);

// sum over bins of max(0, h1 - h0): the total-variation distance of the two PMFs.
double histogram_advantage(const HistogramPair& pair);

// TPR - FPR of the per-bin decision rule "guess member iff h1 > h0",
// evaluated by classifying the samples themselves.
double histogram_rule_advantage(const HistogramPair& pair, std::span<const double> samples0,
                                std::span<const double> samples1);

// Likelihood-ratio rule for zero-mean Gaussians: 1 iff y^2 > alpha^2 when
// the member variance is larger, 1 iff y^2 < alpha^2 otherwise.
// Throws std::domain_error on equal or nonpositive variances.
int threshold_adversary(double sigma0_sq, double sigma1_sq, double y_hat);

// Closed-form advantage of threshold_adversary (same contract as advantage_point).
double advantage_from_threshold(double sigma0_sq, double sigma1_sq);

}  // namespace opmi
