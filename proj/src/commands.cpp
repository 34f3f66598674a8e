#include "opmi/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "opmi/core.hpp"
#include "opmi/report.hpp"
#include "opmi/rng.hpp"
#include "opmi/runner.hpp"
#include "opmi/theory.hpp"

namespace opmi {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Raw flag values plus the Option handles that tell whether each was given.
struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string profile = "desk";
  std::uint64_t seed = 0;
  int workers = 0;
  int n = 0, D = 0, d = 0, trials = 0, bins = 0, repeats = 0;
  double sigma = 0.0, lambda = 0.0, noise_bar = 0.0;
  std::vector<double> gamma, lambda_grid, noise_grid;
  std::vector<int> p;
  bool concentration = false;
  int num_x0 = 100;
  bool quiet = false;

  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_flags(CLI::App& app, Flags& f) {
  auto& o = f.opts;
  o["config"] = app.add_option("--config", f.config_path, "JSON config file (flags override it)");
  o["out-dir"] = app.add_option("--out-dir", f.out_dir, "output directory");
  o["seed"] = app.add_option("--seed", f.seed, "master seed");
  o["profile"] = app.add_option("--profile", f.profile, "scale preset")
                     ->check(CLI::IsMember({"desk", "paper"}));
  o["workers"] = app.add_option("--workers", f.workers, "worker threads (0 = all cores)");
  o["n"] = app.add_option("--n", f.n, "training set size");
  o["D"] = app.add_option("--D", f.D, "ambient feature count");
  o["d"] = app.add_option("--d", f.d, "latent dimension");
  o["sigma"] = app.add_option("--sigma", f.sigma, "label noise standard deviation");
  o["lambda"] = app.add_option("--lambda", f.lambda, "ridge penalty (penalty n*lambda)");
  o["gamma"] = app.add_option("--gamma", f.gamma, "grid of p/n ratios");
  o["p"] = app.add_option("--p", f.p, "grid of parameter counts")->excludes(o["gamma"]);
  o["trials"] = app.add_option("--trials", f.trials, "model outputs per arm");
  o["bins"] = app.add_option("--bins", f.bins, "histogram bins");
  o["repeats"] = app.add_option("--repeats", f.repeats, "independent queries x0");
  o["noise-bar"] = app.add_option("--noise-bar", f.noise_bar,
                                  "std of noise added to non-member outputs");
  o["concentration"] =
      app.add_flag("--concentration", f.concentration, "replace query norms by their means");
  o["num-x0"] = app.add_option("--num-x0", f.num_x0, "sampled queries for closed-form averages");
  o["lambda-grid"] = app.add_option("--lambda-grid", f.lambda_grid, "ridge penalties to sweep");
  o["noise-grid"] = app.add_option("--noise-grid", f.noise_grid, "added noise variances to sweep");
  o["quiet"] = app.add_flag("--quiet", f.quiet, "suppress warnings");
}

// profile < config file < flags.
ExperimentConfig layered_config(ExperimentConfig base, const Flags& f) {
  if (f.given("config")) base = load_config(f.config_path, base);
  if (f.given("seed")) base.seed = f.seed;
  if (f.given("n")) base.n = f.n;
  if (f.given("D")) base.D = f.D;
  if (f.given("d")) base.d = f.d;
  if (f.given("sigma")) base.sigma = f.sigma;
  if (f.given("lambda")) base.lambda = f.lambda;
  if (f.given("noise-bar")) base.noise_bar = f.noise_bar;
  if (f.given("trials")) base.trials_per_arm = f.trials;
  if (f.given("bins")) base.bins = f.bins;
  if (f.given("repeats")) base.repeats = f.repeats;
  if (f.given("gamma")) {
    base.gamma_grid = f.gamma;
    base.p_grid.clear();
  }
  if (f.given("p")) {
    base.p_grid = f.p;
    base.gamma_grid.clear();
  }
  resolve_grid(base);
  return base;
}

Profile profile_of(const Flags& f) { return f.profile == "paper" ? Profile::kPaper : Profile::kDesk; }

std::string series_label(const std::string& key, double value) {
  return key + "=" + format_number(value);
}

void require_min_norm_grid(const ExperimentConfig& c) {
  for (int p : c.p_grid) {
    if (p <= c.n + 1) {
      throw ConfigError(ConfigErrc::kParamOutOfRange,
                        "min-norm closed form needs p > n + 1 (got p = " + std::to_string(p) + ")");
    }
  }
}

struct Output {
  CsvTable table;
  PlotSpec plot;
};

// Per-p advantage averaged over num_x0 sampled queries; query r uses stream
// {r}, shared by every p (and every lambda) so curves are paired.
std::vector<AdvantageEstimate> sampled_advantage(
    const ExperimentConfig& c, int num_x0,
    const std::function<double(int p, double norm_p, double norm_all)>& advantage) {
  std::vector<std::vector<double>> values(c.p_grid.size());
  for (int r = 0; r < num_x0; ++r) {
    RngStream stream = derive_stream(c.seed, {static_cast<std::uint64_t>(r)});
    const QueryNorms norms = sample_query_norms(stream, c.p_grid, c.D);
    for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
      values[i].push_back(advantage(c.p_grid[i], norms.prefix_sq[i], norms.total_sq));
    }
  }
  std::vector<AdvantageEstimate> out;
  for (auto& v : values) out.push_back(AdvantageEstimate::from_values(std::move(v)));
  return out;
}

ExperimentConfig theory_base(int n, int D, std::vector<double> gammas) {
  ExperimentConfig c;
  c.n = n;
  c.D = D;
  c.sigma = 1.0;
  c.gamma_grid = std::move(gammas);
  return c;
}

PlotSpec advantage_plot(std::string title, bool sampled) {
  PlotSpec s;
  s.title = std::move(title);
  s.x_column = "gamma";
  s.x_label = "gamma = p / n";
  s.y_label = "membership advantage";
  s.log_x = true;
  if (sampled) {
    s.y_column = "mean_adv";
    s.error_column = "stderr_adv";
    s.overlay_column = "theory_adv";
  } else {
    s.y_column = "theory_adv";
  }
  return s;
}

Output theory_advantage(const Flags& f) {
  const ExperimentConfig c = layered_config(
      theory_base(1000, 10000000,
                  {1.1, 1.25, 1.5, 1.75, 2, 2.5, 3, 4, 5, 7.5, 10, 15, 20, 30, 50, 75, 100}),
      f);
  require_min_norm_grid(c);
  const bool sampled = !f.concentration;
  std::vector<AdvantageEstimate> mc;
  if (sampled) {
    mc = sampled_advantage(c, f.num_x0, [&](int p, double np, double na) {
      return advantage_point(min_norm_variances(TheoryInputs{c.n, p, c.D, c.sigma, np, na}));
    });
  }
  Output out{curve_table(), advantage_plot("closed-form advantage, min-norm", sampled)};
  for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
    const int p = c.p_grid[i];
    out.table.rows.push_back(
        {"min_norm", std::to_string(p), format_number(c.gamma_of(p)),
         sampled ? format_number(mc[i].mean) : "", sampled ? format_number(mc[i].std_error) : "",
         format_number(advantage_concentrated(c.n, p, c.D, c.sigma)),
         format_number(generalization_error(c.n, p, c.D, c.sigma))});
  }
  return out;
}

Output theory_ridge(const Flags& f) {
  const ExperimentConfig c = layered_config(
      theory_base(1000, 10000000, {0.5, 0.8, 1.1, 1.5, 2, 3, 5, 10, 20, 50, 100}), f);
  std::vector<double> lambdas = {0.0, 1e-3, 1e-2, 1e-1, 1.0};
  if (f.given("lambda-grid")) lambdas = f.lambda_grid;
  else if (f.given("lambda") || f.given("config")) lambdas = {c.lambda};
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError(ConfigErrc::kNegativeLambda, "lambda must be >= 0");
  }
  const bool sampled = !f.concentration;
  Output out{curve_table(), advantage_plot("closed-form advantage, ridge", sampled)};
  for (double lambda : lambdas) {
    // lambda = 0 is the min-norm limit, defined for p > n + 1 only.
    auto closed = [&](int p, double np, double na) {
      if (lambda == 0.0) {
        if (p <= c.n + 1) return kNaN;
        return advantage_point(min_norm_variances(TheoryInputs{c.n, p, c.D, c.sigma, np, na}));
      }
      return advantage_point(ridge_variances(c.n, p, c.D, c.sigma, lambda, np, na));
    };
    std::vector<AdvantageEstimate> mc;
    if (sampled) mc = sampled_advantage(c, f.num_x0, closed);
    for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
      const int p = c.p_grid[i];
      const bool defined = lambda > 0.0 || p > c.n + 1;
      out.table.rows.push_back(
          {series_label("lambda", lambda), std::to_string(p), format_number(c.gamma_of(p)),
           sampled && defined ? format_number(mc[i].mean) : "",
           sampled && defined ? format_number(mc[i].std_error) : "",
           format_number(closed(p, p, c.D)),
           lambda == 0.0 && defined ? format_number(generalization_error(c.n, p, c.D, c.sigma))
                                    : ""});
    }
  }
  return out;
}

Output theory_tradeoff(const Flags& f) {
  ExperimentConfig base = theory_base(100, 3000, {});
  // 20 points spaced geometrically from p = 1.5 n to p = D.
  for (int k = 0; k < 20; ++k) {
    base.p_grid.push_back(static_cast<int>(std::lround(150.0 * std::pow(20.0, k / 19.0))));
  }
  ExperimentConfig c = base;
  if (f.given("n") || f.given("D")) {
    // Rebuild the default grid for the new sizes unless a grid was given.
    c.n = f.given("n") ? f.n : c.n;
    c.D = f.given("D") ? f.D : c.D;
    c.p_grid.clear();
    const double lo = 1.5 * c.n, hi = c.D;
    for (int k = 0; k < 20; ++k) {
      c.p_grid.push_back(static_cast<int>(std::lround(lo * std::pow(hi / lo, k / 19.0))));
    }
    base.n = c.n;
    base.D = c.D;
    base.p_grid = c.p_grid;
  }
  c = layered_config(base, f);
  require_min_norm_grid(c);

  const int num_x0 = f.concentration ? 0 : f.num_x0;
  RngStream fr_stream = derive_stream(c.seed, {0});
  const auto reduction = feature_reduction_curve(c.n, c.D, c.sigma, c.p_grid, num_x0, fr_stream);

  std::vector<double> noise = f.noise_grid;
  if (!f.given("noise-grid")) {
    // Match the generalization errors of the feature-reduction points.
    const double floor = generalization_error(c.n, c.D, c.D, c.sigma);
    for (const auto& pt : reduction) noise.push_back(std::max(0.0, pt.gen_error - floor));
  }
  RngStream na_stream = derive_stream(c.seed, {1});
  const auto addition = noise_addition_curve(c.n, c.D, c.sigma, noise, num_x0, na_stream);

  Output out{curve_table(), {}};
  const bool sampled = num_x0 > 0;
  auto emit = [&](const std::string& series, const TradeoffPoint& pt, double gamma) {
    const std::string adv = format_number(pt.advantage);
    out.table.rows.push_back({series, format_number(pt.knob), format_number(gamma),
                              sampled ? adv : "", "", sampled ? "" : adv,
                              format_number(pt.gen_error)});
  };
  for (const auto& pt : reduction) emit("feature_reduction", pt, pt.knob / c.n);
  for (const auto& pt : addition) emit("noise_addition", pt, c.gamma_of(c.D));

  out.plot.title = "privacy-utility trade-off";
  out.plot.x_column = "gen_error";
  out.plot.y_column = sampled ? "mean_adv" : "theory_adv";
  out.plot.x_label = "generalization error";
  out.plot.y_label = "membership advantage";
  return out;
}

RunOptions run_options(const Flags& f) {
  RunOptions o;
  o.workers = f.workers;
  o.quiet = f.quiet;
  return o;
}

Output sim_curve(const Flags& f, ModelKind kind) {
  ExperimentConfig c = layered_config(profile_config(profile_of(f), kind), f);
  c.model_kind = kind;
  validate(c);
  const CurveResult curve = run_curve(c, run_options(f));
  Output out{curve_table(), advantage_plot("empirical advantage, " + std::string(to_string(kind)),
                                           true)};
  if (!curve.has_overlay()) out.plot.overlay_column.clear();
  append_curve(out.table, std::string(to_string(kind)), curve, c);
  return out;
}

Output sim_ridge(const Flags& f) {
  ExperimentConfig c =
      layered_config(profile_config(profile_of(f), ModelKind::kGaussianLinear), f);
  c.model_kind = ModelKind::kGaussianLinear;
  std::vector<double> lambdas = {1e-3, 1e-2, 1e-1, 1.0};
  if (f.given("lambda-grid")) lambdas = f.lambda_grid;
  else if (c.lambda > 0.0) lambdas = {c.lambda};
  for (double l : lambdas) {
    if (!(l > 0.0)) throw ConfigError(ConfigErrc::kNegativeLambda, "ridge lambdas must be > 0");
  }
  const auto curves = run_ridge_curve(c, lambdas, run_options(f));
  Output out{curve_table(), advantage_plot("empirical advantage, ridge", true)};
  for (std::size_t j = 0; j < curves.size(); ++j) {
    append_curve(out.table, series_label("lambda", lambdas[j]), curves[j], c);
  }
  return out;
}

ExperimentConfig variance_profile(Profile profile) {
  ExperimentConfig c;
  c.model_kind = ModelKind::kGaussianLinear;
  c.sigma = 1.0;
  c.trials_per_arm = 20000;
  c.repeats = 1;
  if (profile == Profile::kPaper) {
    c.n = 400;
    c.D = 20000;
    c.gamma_grid = {1.1, 1.2, 2, 10, 50};
  } else {
    c.n = 100;
    c.D = 5000;
    c.gamma_grid = {2, 10, 50};
  }
  return c;
}

Output variance_check(const Flags& f) {
  ExperimentConfig c = layered_config(variance_profile(profile_of(f)), f);
  c.model_kind = ModelKind::kGaussianLinear;
  const auto rows = run_variance_check(c, run_options(f));
  Output out{variance_table(rows), {}};
  out.plot.title = "output variance by membership";
  out.plot.x_column = "gamma";
  out.plot.y_column = "empirical_var";
  out.plot.overlay_column = "theory_var";
  out.plot.series_column = "arm";
  out.plot.x_label = "gamma = p / n";
  out.plot.y_label = "variance of model output";
  out.plot.log_x = true;
  return out;
}

fs::path prepare_out_dir(const Flags& f) {
  std::string dir = f.out_dir;
  if (!f.given("out-dir")) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : "out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = fs::path(dir) / ".opmi_write_probe";
  std::ofstream test(probe);
  if (ec || !test) {
    throw ConfigError(ConfigErrc::kParse, "output directory '" + dir + "' is not writable");
  }
  test.close();
  fs::remove(probe, ec);
  return dir;
}

void emit(const fs::path& dir, const std::string& name, const Output& result, std::ostream& out) {
  const std::string csv = (dir / (name + ".csv")).string();
  const std::string svg = (dir / (name + ".svg")).string();
  write_csv_file(csv, result.table);
  // The plot is drawn from what landed on disk, never from in-memory results.
  const CsvTable reread = read_csv_file(csv);
  std::ofstream svg_out(svg, std::ios::binary);
  if (!svg_out) throw std::runtime_error("cannot write '" + svg + "'");
  svg_out << render_svg(reread, result.plot);
  out << "wrote " << csv << " and " << svg << "\n";
}

using Handler = std::function<Output(const Flags&)>;

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"theory-advantage", theory_advantage},
      {"theory-ridge", theory_ridge},
      {"theory-tradeoff", theory_tradeoff},
      {"sim-linear", [](const Flags& f) { return sim_curve(f, ModelKind::kGaussianLinear); }},
      {"sim-ridge", sim_ridge},
      {"sim-latent", [](const Flags& f) { return sim_curve(f, ModelKind::kLatentSpace); }},
      {"sim-timeseries", [](const Flags& f) { return sim_curve(f, ModelKind::kTimeSeries); }},
      {"sim-relu", [](const Flags& f) { return sim_curve(f, ModelKind::kReluFeatures); }},
      {"variance-check", variance_check},
  };
  return table;
}

const char* describe(const std::string& name) {
  static const std::map<std::string, const char*> text = {
      {"theory-advantage", "closed-form advantage vs gamma (min-norm)"},
      {"theory-ridge", "closed-form advantage vs gamma for several ridge penalties"},
      {"theory-tradeoff", "feature reduction vs noise addition at matched generalization error"},
      {"sim-linear", "simulated advantage, gaussian_linear"},
      {"sim-ridge", "simulated advantage, ridge on gaussian_linear"},
      {"sim-latent", "simulated advantage, latent_space"},
      {"sim-timeseries", "simulated advantage, time_series"},
      {"sim-relu", "simulated advantage, relu_features"},
      {"variance-check", "output variances by arm against the closed form"},
      {"figures", "every command above into one output directory"},
  };
  return text.at(name);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Membership inference in overparameterized linear regression"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::pair<CLI::App*, std::string>> subs;
  for (const auto& [name, handler] : handlers()) {
    subs.emplace_back(app.add_subcommand(name, describe(name)), name);
  }
  subs.emplace_back(app.add_subcommand("figures", describe("figures")), "figures");
  for (auto& [sub, name] : subs) add_flags(*sub, flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  // Each subcommand registered its own options; use the flags of the one parsed.
  std::string chosen;
  for (auto& [sub, name] : subs) {
    if (sub->parsed()) chosen = name;
  }
  Flags active = flags;
  active.opts.clear();
  for (auto& [sub, name] : subs) {
    if (name != chosen) continue;
    for (const CLI::Option* opt : sub->get_options()) {
      const std::string key = opt->get_name(false, true);
      if (key.rfind("--", 0) == 0) active.opts[key.substr(2)] = const_cast<CLI::Option*>(opt);
    }
  }

  try {
    const fs::path dir = prepare_out_dir(active);
    if (chosen == "figures") {
      for (const auto& [name, handler] : handlers()) emit(dir, name, handler(active), out);
    } else {
      for (const auto& [name, handler] : handlers()) {
        if (name == chosen) emit(dir, name, handler(active), out);
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PoleError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace opmi
