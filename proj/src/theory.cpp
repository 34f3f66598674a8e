#include "opmi/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "opmi/numerics.hpp"

namespace opmi {
namespace {

void require_pole_free(int n, int p) {
  if (p <= n + 1) {
    throw PoleError("min-norm asymptotics need p > n + 1 (got n = " + std::to_string(n) +
                    ", p = " + std::to_string(p) + ")");
  }
}

}  // namespace

TheoryInputs TheoryInputs::concentrated(int n, int p, int D, double sigma) {
  return TheoryInputs{n, p, D, sigma, static_cast<double>(p), static_cast<double>(D)};
}

double sigma0_sq(const TheoryInputs& inp) {
  require_pole_free(inp.n, inp.p);
  const double n = inp.n, p = inp.p, D = inp.D;
  const double s2 = inp.sigma * inp.sigma;
  return (n / p) * (1.0 / D + (1.0 + s2 - p / D) / (p - n - 1.0)) * inp.norm_x0p_sq;
}

double sigma1_sq(const TheoryInputs& inp) {
  if (inp.D < 1) throw std::invalid_argument("sigma1_sq requires D >= 1");
  return inp.sigma * inp.sigma + inp.norm_x0_sq / inp.D;
}

VariancePair min_norm_variances(const TheoryInputs& inp) {
  return {sigma0_sq(inp), sigma1_sq(inp)};
}

double lrt_threshold(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("lrt_threshold needs positive variances");
  if (a == b) throw std::domain_error("lrt_threshold undefined for equal variances");
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double gap = hi - lo;
  // log(hi/lo) / (hi - lo) via log1p so ratios near 1 stay accurate.
  return std::sqrt(lo * hi * std::log1p(gap / lo) / gap);
}

double advantage_point(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("advantage_point needs positive variances");
  }
  if (a == b) return 0.0;
  const double alpha = lrt_threshold(a, b);
  const double s_small = std::sqrt(std::min(a, b));
  const double s_large = std::sqrt(std::max(a, b));
  const double adv = 2.0 * (normal_cdf(alpha / s_small) - normal_cdf(alpha / s_large));
  return std::clamp(adv, 0.0, 1.0);
}

QueryNorms sample_query_norms(RngStream& stream, std::span<const int> p_values, int D) {
  std::vector<std::size_t> order(p_values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  QueryNorms out;
  out.prefix_sq.assign(p_values.size(), 0.0);
  double running = 0.0;
  int covered = 0;
  for (std::size_t idx : order) {
    const int p = p_values[idx];
    if (p > covered) {
      running += stream.chi_square(p - covered);
      covered = p;
    }
    out.prefix_sq[idx] = running;
  }
  if (D > covered) running += stream.chi_square(D - covered);
  out.total_sq = running;
  return out;
}

double advantage_concentrated(int n, int p, int D, double sigma) {
  return advantage_point(min_norm_variances(TheoryInputs::concentrated(n, p, D, sigma)));
}

AdvantageEstimate advantage_thm32(int n, int p, int D, double sigma, int num_x0,
                                  RngStream& stream) {
  require_pole_free(n, p);
  std::vector<double> values;
  values.reserve(num_x0);
  const int p_values[] = {p};
  for (int i = 0; i < num_x0; ++i) {
    const QueryNorms norms = sample_query_norms(stream, p_values, D);
    const TheoryInputs inp{n, p, D, sigma, norms.prefix_sq[0], norms.total_sq};
    values.push_back(advantage_point(min_norm_variances(inp)));
  }
  return AdvantageEstimate::from_values(std::move(values));
}

StieltjesValue stieltjes_mp(double gamma, double lambda) {
  if (!(gamma > 0.0)) throw std::invalid_argument("stieltjes_mp requires gamma > 0");
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("stieltjes_mp requires lambda > 0 (lambda -> 0 is the min-norm case)");
  }
  const double b = 1.0 - gamma + lambda;
  const double root = std::sqrt(b * b + 4.0 * gamma * lambda);
  // Positive root of gamma*lambda*g^2 + b*g - 1 = 0, in the cancellation-free form.
  const double g = b >= 0.0 ? 2.0 / (b + root) : (root - b) / (2.0 * gamma * lambda);
  const double g_prime = (g + gamma * g * g) / (b + 2.0 * gamma * lambda * g);
  return {g, g_prime, gamma, lambda};
}

VariancePair ridge_variances(int n, int p, int D, double sigma, double lambda, double norm_x0p_sq,
                             double norm_x0_sq) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_variances requires lambda > 0");
  if (p < 1 || n < 1 || D < 1) throw std::invalid_argument("ridge_variances requires n, p, D >= 1");
  const double gamma = static_cast<double>(p) / n;
  const auto [g, gp, gm, lm] = stieltjes_mp(gamma, lambda);
  const double s2 = sigma * sigma;
  const double signal_noise = s2 + 1.0 - static_cast<double>(p) / D;
  const double a_over_p = norm_x0p_sq / p;
  const double a_over_D = norm_x0p_sq / D;
  const double tail_over_D = (norm_x0_sq - norm_x0p_sq) / D;
  const double q = gamma * g * a_over_p;  // gamma g(-lambda) ||x0_p||^2 / p

  VariancePair v;
  v.sigma0_sq = gp * gamma / ((1.0 + g * gamma) * (1.0 + g * gamma)) * signal_noise * a_over_p +
                (1.0 - 2.0 * lambda * g + lambda * lambda * gp) * a_over_D;

  const double shrink = lambda * lambda / ((lambda + gamma * g) * (lambda + q));
  const double leverage = q / (1.0 + q);
  v.sigma1_sq = shrink * shrink * gamma * gp * a_over_p * signal_noise +
                leverage * leverage * (s2 + tail_over_D) +
                (1.0 - 2.0 * lambda * g / (1.0 + q) + lambda * lambda * gp / ((1.0 + q) * (1.0 + q))) *
                    a_over_D;
  return v;
}

double ridge_advantage_concentrated(int n, int p, int D, double sigma, double lambda) {
  return advantage_point(ridge_variances(n, p, D, sigma, lambda, p, D));
}

double generalization_error(int n, int p, int D, double sigma) {
  require_pole_free(n, p);
  const double s2 = sigma * sigma;
  return 1.0 + s2 +
         n * ((1.0 + s2 - static_cast<double>(p) / D) / (p - n - 1.0) - 1.0 / D);
}

double generalization_error_via_variance(int n, int p, int D, double sigma) {
  const double expected_sigma0 = sigma0_sq(TheoryInputs::concentrated(n, p, D, sigma));
  return 1.0 + sigma * sigma + expected_sigma0 - 2.0 * n / static_cast<double>(D);
}

std::vector<TradeoffPoint> noise_addition_curve(int n, int D, double sigma,
                                                std::span<const double> noise_var_grid,
                                                int num_x0, RngStream& stream) {
  require_pole_free(n, D);
  const double base_error = generalization_error(n, D, D, sigma);

  std::vector<TheoryInputs> queries;
  if (num_x0 <= 0) {
    queries.push_back(TheoryInputs::concentrated(n, D, D, sigma));
  } else {
    const int p_values[] = {D};
    for (int i = 0; i < num_x0; ++i) {
      const QueryNorms norms = sample_query_norms(stream, p_values, D);
      queries.push_back(TheoryInputs{n, D, D, sigma, norms.prefix_sq[0], norms.total_sq});
    }
  }

  std::vector<TradeoffPoint> curve;
  for (double noise_var : noise_var_grid) {
    if (!(noise_var >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
    double adv = 0.0;
    for (const auto& q : queries) adv += advantage_point(sigma0_sq(q) + noise_var, sigma1_sq(q));
    curve.push_back({base_error + noise_var, adv / static_cast<double>(queries.size()), noise_var});
  }
  return curve;
}

std::vector<TradeoffPoint> feature_reduction_curve(int n, int D, double sigma,
                                                   std::span<const int> p_grid, int num_x0,
                                                   RngStream& stream) {
  for (int p : p_grid) {
    require_pole_free(n, p);
    if (p > D) throw std::invalid_argument("feature_reduction_curve requires p <= D");
  }
  std::vector<double> adv(p_grid.size(), 0.0);
  if (num_x0 <= 0) {
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      adv[i] = advantage_concentrated(n, p_grid[i], D, sigma);
    }
  } else {
    for (int r = 0; r < num_x0; ++r) {
      const QueryNorms norms = sample_query_norms(stream, p_grid, D);
      for (std::size_t i = 0; i < p_grid.size(); ++i) {
        const TheoryInputs inp{n, p_grid[i], D, sigma, norms.prefix_sq[i], norms.total_sq};
        adv[i] += advantage_point(min_norm_variances(inp)) / num_x0;
      }
    }
  }
  std::vector<TradeoffPoint> curve;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    curve.push_back(
        {generalization_error(n, p_grid[i], D, sigma), adv[i], static_cast<double>(p_grid[i])});
  }
  return curve;
}

double noise_advantage_at_gen_error(int n, int D, double sigma, double target_gen_error) {
  const double noise_var = target_gen_error - generalization_error(n, D, D, sigma);
  if (noise_var < 0.0) {
    throw std::domain_error("target generalization error is below the noise-free minimum");
  }
  const TheoryInputs inp = TheoryInputs::concentrated(n, D, D, sigma);
  return advantage_point(sigma0_sq(inp) + noise_var, sigma1_sq(inp));
}

}  // namespace opmi
