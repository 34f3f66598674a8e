#include "opmi/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "opmi/datamodels.hpp"
#include "opmi/estimator.hpp"
#include "opmi/rng.hpp"
#include "opmi/theory.hpp"

namespace opmi {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= count || failed.load(std::memory_order_relaxed)) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// outputs[i][m] holds trials_per_arm samples for grid index i and arm m.
using ArmSamples = std::vector<std::array<std::vector<double>, 2>>;

ArmSamples sample_arms(const ExperimentConfig& config, const QueryContext& ctx, int repeat,
                       int workers) {
  const std::size_t grid = config.p_grid.size();
  const std::size_t trials = config.trials_per_arm;
  ArmSamples out(grid);
  for (auto& arms : out) {
    arms[0].assign(trials, 0.0);
    arms[1].assign(trials, 0.0);
  }
  parallel_for(grid * 2 * trials, workers, [&](std::size_t task) {
    const std::size_t t = task % trials;
    const std::size_t m = (task / trials) % 2;
    const std::size_t i = task / (2 * trials);
    RngStream stream = derive_stream(config.seed, {static_cast<std::uint64_t>(repeat), i, m, t});
    out[i][m][t] =
        sample_trial(ctx, config.p_grid[i], static_cast<int>(m), config.lambda, stream).y_hat;
  });
  return out;
}

QueryContext context_for_repeat(const ExperimentConfig& config, int repeat) {
  RngStream stream =
      derive_stream(config.seed, {static_cast<std::uint64_t>(repeat), kContextStream});
  return make_context(config, stream);
}

// Closed-form variances for the realized query of a gaussian_linear context.
VariancePair closed_form_variances(const ExperimentConfig& config, const QueryContext& ctx, int p) {
  const double norm_p = ctx.x0.head(p).squaredNorm();
  const double norm_all = ctx.x0.squaredNorm();
  VariancePair v;
  if (config.lambda > 0.0) {
    if (p <= config.n) return {kNaN, kNaN};
    v = ridge_variances(config.n, p, config.D, config.sigma, config.lambda, norm_p, norm_all);
  } else {
    if (p <= config.n + 1) return {kNaN, kNaN};
    v = min_norm_variances(TheoryInputs{config.n, p, config.D, config.sigma, norm_p, norm_all});
  }
  v.sigma0_sq += config.noise_bar * config.noise_bar;
  return v;
}

double sample_variance(const std::vector<double>& v, double* mean_out) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  if (mean_out) *mean_out = mean;
  return v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
}

void warn_if_small(const ExperimentConfig& config, const RunOptions& options) {
  if (!options.quiet && config.trials_per_arm < kMinSamplesPerArm) {
    std::clog << "warning: " << config.trials_per_arm << " trials per arm is below "
              << kMinSamplesPerArm << "; histogram advantage is biased at this size\n";
  }
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

CurveResult run_curve(const ExperimentConfig& input, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = input;
  resolve_grid(config);
  warn_if_small(config, options);
  const int workers = resolve_workers(options.workers);
  const std::size_t grid = config.p_grid.size();
  const bool overlay = config.model_kind == ModelKind::kGaussianLinear;

  std::vector<std::vector<double>> per_repeat(grid);
  std::vector<double> overlay_sum(grid, 0.0);
  for (int r = 0; r < config.repeats; ++r) {
    const QueryContext ctx = context_for_repeat(config, r);
    const ArmSamples samples = sample_arms(config, ctx, r, workers);
    for (std::size_t i = 0; i < grid; ++i) {
      const HistogramPair pair = build_histogram_pair(samples[i][0], samples[i][1], config.bins);
      per_repeat[i].push_back(histogram_advantage(pair));
      if (overlay) {
        const VariancePair v = closed_form_variances(config, ctx, config.p_grid[i]);
        overlay_sum[i] += std::isnan(v.sigma0_sq) ? kNaN : advantage_point(v);
      }
    }
  }

  CurveResult result;
  result.model_kind = config.model_kind;
  result.lambda = config.lambda;
  result.p_grid = config.p_grid;
  for (std::size_t i = 0; i < grid; ++i) {
    result.gamma.push_back(config.gamma_of(config.p_grid[i]));
    result.empirical.push_back(AdvantageEstimate::from_values(std::move(per_repeat[i])));
    if (overlay) result.theory_overlay.push_back(overlay_sum[i] / config.repeats);
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CurveResult> run_ridge_curve(const ExperimentConfig& config,
                                         std::span<const double> lambdas,
                                         const RunOptions& options) {
  std::vector<CurveResult> curves;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw std::invalid_argument("run_ridge_curve requires lambda > 0");
    ExperimentConfig c = config;
    c.lambda = lambda;
    curves.push_back(run_curve(c, options));
  }
  return curves;
}

std::vector<VarianceRow> run_variance_check(const ExperimentConfig& input,
                                            const RunOptions& options) {
  ExperimentConfig config = input;
  resolve_grid(config);
  if (config.model_kind != ModelKind::kGaussianLinear) {
    throw std::invalid_argument("run_variance_check supports gaussian_linear only");
  }
  const int workers = resolve_workers(options.workers);
  std::vector<VarianceRow> rows;
  for (int r = 0; r < config.repeats; ++r) {
    const QueryContext ctx = context_for_repeat(config, r);
    const ArmSamples samples = sample_arms(config, ctx, r, workers);
    for (std::size_t i = 0; i < config.p_grid.size(); ++i) {
      const int p = config.p_grid[i];
      const VariancePair v = closed_form_variances(config, ctx, p);
      for (int m = 0; m < 2; ++m) {
        VarianceRow row;
        row.repeat = r;
        row.p = p;
        row.gamma = config.gamma_of(p);
        row.m = m;
        row.empirical_var = sample_variance(samples[i][m], &row.empirical_mean);
        row.theory_var = m == 0 ? v.sigma0_sq : v.sigma1_sq;
        if (m == 1 && std::isnan(row.theory_var) && config.lambda == 0.0) {
          row.theory_var = sigma1_sq(TheoryInputs{config.n, p, config.D, config.sigma, 0.0,
                                                  ctx.x0.squaredNorm()});
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

ExperimentConfig profile_config(Profile profile, ModelKind kind) {
  ExperimentConfig c;
  c.model_kind = kind;
  const bool paper = profile == Profile::kPaper;
  c.sigma = 1.0;
  c.bins = 150;
  c.trials_per_arm = paper ? 100000 : 20000;
  c.repeats = paper ? 20 : 10;
  switch (kind) {
    case ModelKind::kGaussianLinear:
      c.n = paper ? 100 : 50;
      c.D = paper ? 3000 : 1000;
      c.gamma_grid = {1.5, 2.0, 4.0, 8.0, 16.0};
      if (paper) c.gamma_grid.push_back(30.0);
      break;
    case ModelKind::kLatentSpace:
      c.n = paper ? 200 : 50;
      c.d = paper ? 20 : 10;
      c.D = paper ? 4000 : 1000;
      c.gamma_grid = {0.5, 1.2, 2.0, 4.0, 8.0, 16.0};
      break;
    case ModelKind::kTimeSeries:
      c.n = paper ? 128 : 64;
      c.D = paper ? 1024 : 512;
      c.gamma_grid = {0.5, 1.25, 2.0, 4.0, 8.0};
      break;
    case ModelKind::kReluFeatures:
      c.n = paper ? 100 : 50;
      c.D = paper ? 5000 : 1000;
      // Runs up to p = D; the advantage climbs back above its near-threshold
      // peak only at the far end of the grid.
      c.gamma_grid = paper ? std::vector<double>{0.5, 1.2, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0}
                           : std::vector<double>{0.5, 1.2, 2.0, 4.0, 8.0, 12.0, 20.0};
      break;
  }
  resolve_grid(c);
  return c;
}

}  // namespace opmi
