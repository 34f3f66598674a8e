#pragma once

// Experiment orchestration: for every repeat a fresh query context, for every
// grid point and arm trials_per_arm model outputs, then one histogram
// advantage per (repeat, grid point), aggregated over repeats.
//
// Trial t of arm m at grid index i in repeat r draws from
// derive_stream(seed, {r, i, m, t}); the context of repeat r from
// derive_stream(seed, {r, kContextStream}). Results are stored by index, so
// the output does not depend on the number of workers.

#include <cstdint>
#include <span>
#include <vector>

#include "opmi/core.hpp"

namespace opmi {

inline constexpr std::uint64_t kContextStream = ~std::uint64_t{0};

struct RunOptions {
  int workers = 0;     // 0 selects std::thread::hardware_concurrency()
  bool quiet = false;  // suppress the small-sample warning
};

struct CurveResult {
  ModelKind model_kind = ModelKind::kGaussianLinear;
  double lambda = 0.0;
  std::vector<int> p_grid;
  std::vector<double> gamma;
  std::vector<AdvantageEstimate> empirical;
  // Closed-form advantage averaged over the same query draws; gaussian_linear
  // only, NaN where the asymptotics do not apply (p <= n + 1).
  std::vector<double> theory_overlay;
  double wall_time = 0.0;  // seconds

  bool has_overlay() const { return !theory_overlay.empty(); }
};

struct VarianceRow {
  int repeat = 0;
  int p = 0;
  double gamma = 0.0;
  int m = 0;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double theory_var = 0.0;  // NaN when undefined
};

int resolve_workers(int requested);

CurveResult run_curve(const ExperimentConfig& config, const RunOptions& options = {});

// One curve per lambda (> 0), sharing the random streams of `config`.
std::vector<CurveResult> run_ridge_curve(const ExperimentConfig& config,
                                         std::span<const double> lambdas,
                                         const RunOptions& options = {});

// Per (repeat, p, arm) sample variance of the outputs against the closed-form
// variances. gaussian_linear only.
std::vector<VarianceRow> run_variance_check(const ExperimentConfig& config,
                                            const RunOptions& options = {});

enum class Profile { kDesk, kPaper };

// Scale presets: desk (n = 50, D = 1000, 2e4 trials/arm, 10 repeats) and
// paper (n = 100, D = 3000, 1e5 trials/arm, 20 repeats), with per-model grids.
ExperimentConfig profile_config(Profile profile, ModelKind kind);

}  // namespace opmi
