#pragma once

// Closed-form asymptotics for membership inference against (ridge)
// least-squares regression on Gaussian data.
//
// Model: beta ~ N(0, I_D / D), x_i ~ N(0, I_D), y_i = x_i^T beta + eps_i with
// eps_i ~ N(0, sigma^2). The regressor sees only the first p of D features.
// Given m (membership of the query x0), the output y0_hat is asymptotically
// N(0, sigma_m^2); the optimal adversary is a likelihood-ratio test between
// the two zero-mean Gaussians.

#include <span>
#include <vector>

#include "opmi/core.hpp"
#include "opmi/rng.hpp"

namespace opmi {

struct TheoryInputs {
  int n = 0;
  int p = 0;
  int D = 0;
  double sigma = 0.0;
  double norm_x0p_sq = 0.0;  // squared norm of the first p coordinates of x0
  double norm_x0_sq = 0.0;   // squared norm of all D coordinates of x0

  // Inputs with the squared norms replaced by their expectations (p and D).
  static TheoryInputs concentrated(int n, int p, int D, double sigma);
};

// Marchenko-Pastur Stieltjes transform evaluated at -lambda and its derivative.
struct StieltjesValue {
  double g = 0.0;
  double g_prime = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
};

// Output variance for a non-member query. Throws PoleError when p <= n + 1.
double sigma0_sq(const TheoryInputs& inp);
// Output variance for a member query: sigma^2 + ||x0||^2 / D.
double sigma1_sq(const TheoryInputs& inp);
VariancePair min_norm_variances(const TheoryInputs& inp);

// |y| at which N(0, a) and N(0, b) have equal density. Symmetric in (a, b).
// Throws std::domain_error for equal or nonpositive variances.
double lrt_threshold(double sigma0_sq, double sigma1_sq);

// Advantage of the likelihood-ratio adversary for one query:
// 2 (Phi(alpha / s_small) - Phi(alpha / s_large)). Zero for equal variances.
double advantage_point(double sigma0_sq, double sigma1_sq);
inline double advantage_point(const VariancePair& v) {
  return advantage_point(v.sigma0_sq, v.sigma1_sq);
}

// Norms of one random query x0 ~ N(0, I_D), truncated at each requested p.
struct QueryNorms {
  std::vector<double> prefix_sq;  // ||x0_p||^2 for each p in the request order
  double total_sq = 0.0;          // ||x0||^2
};

// Draws the norm profile of x0 ~ N(0, I_D) at the given truncation points,
// exactly in distribution (independent chi-square increments).
QueryNorms sample_query_norms(RngStream& stream, std::span<const int> p_values, int D);

// Advantage with the expectation over x0 replaced by concentration
// (||x0_p||^2 -> p, ||x0||^2 -> D).
double advantage_concentrated(int n, int p, int D, double sigma);

// Monte Carlo average of advantage_point over num_x0 draws of x0 ~ N(0, I_D).
AdvantageEstimate advantage_thm32(int n, int p, int D, double sigma, int num_x0,
                                  RngStream& stream);

// g(-lambda) for aspect ratio gamma. Requires gamma > 0, lambda > 0.
StieltjesValue stieltjes_mp(double gamma, double lambda);

// Output variances of ridge regression with penalty n * lambda (lambda > 0).
VariancePair ridge_variances(int n, int p, int D, double sigma, double lambda,
                             double norm_x0p_sq, double norm_x0_sq);

double ridge_advantage_concentrated(int n, int p, int D, double sigma, double lambda);

// Expected squared prediction error of the min-norm regressor on a fresh point.
double generalization_error(int n, int p, int D, double sigma);
// The same quantity written as 1 + sigma^2 + E[sigma0^2] - 2n/D.
double generalization_error_via_variance(int n, int p, int D, double sigma);

// Full-feature model (p = D) with N(0, noise_var) added to non-member outputs.
// With num_x0 == 0 the concentration path is used, otherwise x0 is sampled.
std::vector<TradeoffPoint> noise_addition_curve(int n, int D, double sigma,
                                                std::span<const double> noise_var_grid,
                                                int num_x0, RngStream& stream);

// Varying p (n + 1 < p <= D) with no added noise. num_x0 as above.
std::vector<TradeoffPoint> feature_reduction_curve(int n, int D, double sigma,
                                                   std::span<const int> p_grid, int num_x0,
                                                   RngStream& stream);

// Advantage on the noise-addition curve at a target generalization error
// (noise variance = target - generalization_error(n, D, D, sigma), concentration path).
double noise_advantage_at_gen_error(int n, int D, double sigma, double target_gen_error);

}  // namespace opmi
