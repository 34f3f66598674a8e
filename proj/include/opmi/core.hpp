#pragma once

// Domain types shared by every stage of a membership-inference experiment.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opmi {

enum class ModelKind { kGaussianLinear, kLatentSpace, kTimeSeries, kReluFeatures };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

// One code per config invariant so callers (and tests) can tell violations apart.
enum class ConfigErrc {
  kBadModelKind,
  kBadN,
  kBadDimension,
  kEmptyGrid,
  kParamOutOfRange,
  kBadLatentDimension,
  kNegativeSigma,
  kNegativeLambda,
  kNegativeNoiseBar,
  kBadBins,
  kBadTrials,
  kBadRepeats,
  kParse,
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(ConfigErrc code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}
  ConfigErrc code() const { return code_; }

 private:
  ConfigErrc code_;
};

// Asymptotic formulas are singular at p = n + 1.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ExperimentConfig {
  ModelKind model_kind = ModelKind::kGaussianLinear;
  int n = 50;
  // Parameter counts. When gamma_grid is non-empty it is authoritative and
  // p_grid is recomputed as round(gamma * n) by resolve_grid().
  std::vector<int> p_grid;
  std::vector<double> gamma_grid;
  int D = 1000;
  int d = 10;  // latent dimension, latent_space only
  double sigma = 1.0;
  double lambda = 0.0;
  double noise_bar = 0.0;
  int trials_per_arm = 20000;
  int bins = 150;
  int repeats = 10;
  std::uint64_t seed = 0;

  int p_max() const;
  double gamma_of(int p) const { return static_cast<double>(p) / n; }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Fills p_grid from gamma_grid (if given) and validates. Throws ConfigError.
void resolve_grid(ExperimentConfig& config);
void validate(const ExperimentConfig& config);

// Key/value tree (JSON) persistence. Keys absent from the text keep their
// value from `base`; unknown keys are rejected.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(std::string_view text, const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {});
void save_config(const ExperimentConfig& config, const std::string& path);

struct VariancePair {
  double sigma0_sq = 0.0;  // output variance given m = 0
  double sigma1_sq = 0.0;  // output variance given m = 1
};

struct PosteriorHistogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> pmf;
};

struct AdvantageEstimate {
  std::vector<double> per_x0;
  double mean = 0.0;
  double std_error = 0.0;  // standard error of the mean over per_x0

  // std_error = sample std-dev / sqrt(count); zero for a single value.
  static AdvantageEstimate from_values(std::vector<double> values);
};

struct TradeoffPoint {
  double gen_error = 0.0;
  double advantage = 0.0;
  double knob = 0.0;  // p for feature reduction, noise variance for noise addition
};

}  // namespace opmi
