#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "opmi/core.hpp"

namespace opmi {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGaussianLinear: return "gaussian_linear";
    case ModelKind::kLatentSpace: return "latent_space";
    case ModelKind::kTimeSeries: return "time_series";
    case ModelKind::kReluFeatures: return "relu_features";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto kind : {ModelKind::kGaussianLinear, ModelKind::kLatentSpace,
                    ModelKind::kTimeSeries, ModelKind::kReluFeatures}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError(ConfigErrc::kBadModelKind, "unknown model kind '" + std::string(name) + "'");
}

int ExperimentConfig::p_max() const {
  return p_grid.empty() ? 0 : *std::max_element(p_grid.begin(), p_grid.end());
}

AdvantageEstimate AdvantageEstimate::from_values(std::vector<double> values) {
  AdvantageEstimate est;
  est.per_x0 = std::move(values);
  const auto count = static_cast<double>(est.per_x0.size());
  if (est.per_x0.empty()) return est;
  est.mean = std::accumulate(est.per_x0.begin(), est.per_x0.end(), 0.0) / count;
  if (est.per_x0.size() > 1) {
    double ss = 0.0;
    for (double v : est.per_x0) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
  }
  return est;
}

void resolve_grid(ExperimentConfig& config) {
  if (config.n < 1) throw ConfigError(ConfigErrc::kBadN, "n must be >= 1");
  if (!config.gamma_grid.empty()) {
    config.p_grid.clear();
    for (double g : config.gamma_grid) {
      config.p_grid.push_back(static_cast<int>(std::lround(g * config.n)));
    }
  }
  validate(config);
}

void validate(const ExperimentConfig& c) {
  if (c.n < 1) throw ConfigError(ConfigErrc::kBadN, "n must be >= 1");
  if (c.D < 1) throw ConfigError(ConfigErrc::kBadDimension, "D must be >= 1");
  if (c.p_grid.empty()) throw ConfigError(ConfigErrc::kEmptyGrid, "parameter grid is empty");
  for (int p : c.p_grid) {
    if (p < 1 || p > c.D) {
      throw ConfigError(ConfigErrc::kParamOutOfRange,
                        "p = " + std::to_string(p) + " outside [1, D = " + std::to_string(c.D) + "]");
    }
  }
  if (c.model_kind == ModelKind::kLatentSpace) {
    const int p_min = *std::min_element(c.p_grid.begin(), c.p_grid.end());
    if (c.d < 1 || c.d > p_min) {
      throw ConfigError(ConfigErrc::kBadLatentDimension,
                        "latent dimension d must satisfy 1 <= d <= min p");
    }
  }
  if (!(c.sigma >= 0.0)) throw ConfigError(ConfigErrc::kNegativeSigma, "sigma must be >= 0");
  if (!(c.lambda >= 0.0)) throw ConfigError(ConfigErrc::kNegativeLambda, "lambda must be >= 0");
  if (!(c.noise_bar >= 0.0)) {
    throw ConfigError(ConfigErrc::kNegativeNoiseBar, "noise_bar must be >= 0");
  }
  if (c.bins < 2) throw ConfigError(ConfigErrc::kBadBins, "bins must be >= 2");
  if (c.trials_per_arm < 1) throw ConfigError(ConfigErrc::kBadTrials, "trials_per_arm must be >= 1");
  if (c.repeats < 1) throw ConfigError(ConfigErrc::kBadRepeats, "repeats must be >= 1");
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = std::string(to_string(c.model_kind));
  j["n"] = c.n;
  j["p_grid"] = c.p_grid;
  j["gamma_grid"] = c.gamma_grid;
  j["D"] = c.D;
  j["d"] = c.d;
  j["sigma"] = c.sigma;
  j["lambda"] = c.lambda;
  j["noise_bar"] = c.noise_bar;
  j["trials_per_arm"] = c.trials_per_arm;
  j["bins"] = c.bins;
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(std::string_view text, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(ConfigErrc::kParse, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(ConfigErrc::kParse, "config root must be an object");

  static const char* kKnown[] = {"model", "n", "p_grid", "gamma_grid", "D", "d", "sigma",
                                 "lambda", "noise_bar", "trials_per_arm", "bins", "repeats",
                                 "seed"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return item.key() == k; }) == std::end(kKnown)) {
      throw ConfigError(ConfigErrc::kParse, "unknown config key '" + item.key() + "'");
    }
  }

  ExperimentConfig c = base;
  try {
    if (j.contains("model")) c.model_kind = model_kind_from_string(j["model"].get<std::string>());
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("p_grid")) {
      c.p_grid = j["p_grid"].get<std::vector<int>>();
      // An explicit p grid wins over a gamma grid inherited from the base.
      if (!j.contains("gamma_grid")) c.gamma_grid.clear();
    }
    if (j.contains("gamma_grid")) c.gamma_grid = j["gamma_grid"].get<std::vector<double>>();
    if (j.contains("D")) c.D = j["D"].get<int>();
    if (j.contains("d")) c.d = j["d"].get<int>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("noise_bar")) c.noise_bar = j["noise_bar"].get<double>();
    if (j.contains("trials_per_arm")) c.trials_per_arm = j["trials_per_arm"].get<int>();
    if (j.contains("bins")) c.bins = j["bins"].get<int>();
    if (j.contains("repeats")) c.repeats = j["repeats"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(ConfigErrc::kParse, std::string("config type error: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrc::kParse, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str(), base);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
  out << config_to_json(config);
}

}  // namespace opmi
