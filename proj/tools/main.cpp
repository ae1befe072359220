#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mcdist/config.hpp"
#include "mcdist/csv.hpp"
#include "mcdist/estimators.hpp"
#include "mcdist/harness.hpp"
#include "mcdist/particle.hpp"
#include "mcdist/units.hpp"
#include "mcdist/version.hpp"

namespace fs = std::filesystem;
using namespace mcdist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<std::string> mode;
};

void apply_overrides(ExperimentConfig& cfg, const CommonOpts& opts) {
  if (opts.seed) cfg.sim.seed = *opts.seed;
  if (opts.realizations) cfg.n_realizations = *opts.realizations;
  if (opts.mode) {
    if (*opts.mode == "particle") cfg.sim.mode = SimMode::Particle;
    else if (*opts.mode == "poisson") cfg.sim.mode = SimMode::PoissonAnalytic;
    else throw ConfigError("mode must be 'particle' or 'poisson'");
  }
}

int cmd_crlb(const CommonOpts& opts) {
  const ParsedConfig raw = load_config_file(opts.config_path);
  ExperimentConfig cfg = make_experiment_config(raw);
  apply_overrides(cfg, opts);
  if (cfg.sweep != SweepKind::Distance)
    throw ConfigError("crlb: config must sweep distance");

  const Eigen::ArrayXd times = sample_times(cfg.sim);
  std::vector<double> t_list(times.begin(), times.end());
  const auto points = crlb_curve(cfg.base_env, cfg.sweep_values, t_list);

  fs::create_directories(opts.out);
  write_file(opts.out + "/crlb_curve.csv", crlb_curve_csv(points));
  write_file(opts.out + "/manifest.txt", make_manifest(raw, cfg.sim.seed).to_text());
  return kExitOk;
}

int cmd_experiment(const CommonOpts& opts) {
  const ParsedConfig raw = load_config_file(opts.config_path);
  ExperimentConfig cfg = make_experiment_config(raw);
  apply_overrides(cfg, opts);
  if (cfg.protocols.empty()) throw ConfigError("experiment: no protocols configured");

  const auto summaries = run_experiment(cfg);

  fs::create_directories(opts.out);
  write_file(opts.out + "/mse_sweep.csv", mse_sweep_csv(summaries, cfg.sweep));
  write_file(opts.out + "/crlb.csv", crlb_summary_csv(summaries, cfg.sweep));
  write_file(opts.out + "/manifest.txt", make_manifest(raw, cfg.sim.seed).to_text());
  return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
  const ParsedConfig raw = load_config_file(opts.config_path);
  ExperimentConfig cfg = make_experiment_config(raw);
  apply_overrides(cfg, opts);
  if (!(cfg.base_env.d > 0.0)) throw ConfigError("simulate: environment d_um must be > 0");

  const Eigen::ArrayXd times = sample_times(cfg.sim);
  std::string csv = "realization,t_ms,count\n";
  for (int r = 0; r < cfg.n_realizations; ++r) {
    const ObservationSeries series =
        cfg.sim.mode == SimMode::Particle
            ? simulate_realization(cfg.base_env, cfg.sim, r)
            : sample_poisson_series(cfg.base_env, cfg.base_env.d, times, cfg.sim.seed, r);
    for (Eigen::Index m = 0; m < series.size(); ++m) {
      csv += std::to_string(r);
      csv += ',';
      csv += format_double(units::s_to_ms(series.times[m]));
      csv += ',';
      csv += format_double(series.counts[m]);
      csv += '\n';
    }
  }
  fs::create_directories(opts.out);
  write_file(opts.out + "/observations.csv", csv);
  write_file(opts.out + "/manifest.txt", make_manifest(raw, cfg.sim.seed).to_text());
  return kExitOk;
}

ObservationSeries load_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("series file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_ms,count")
    throw ConfigError("series file must start with header 't_ms,count'");

  std::vector<double> times, counts;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t_text, c_text;
    if (!std::getline(row, t_text, ',') || !std::getline(row, c_text))
      throw ConfigError("series line " + std::to_string(line_no) + ": expected 't_ms,count'");
    try {
      times.push_back(units::ms_to_s(std::stod(t_text)));
      counts.push_back(std::stod(c_text));
    } catch (const std::exception&) {
      throw ConfigError("series line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (times.empty()) throw ConfigError("series file has no observations");

  ObservationSeries series;
  series.times = Eigen::Map<Eigen::ArrayXd>(times.data(), times.size());
  series.counts = Eigen::Map<Eigen::ArrayXd>(counts.data(), counts.size());
  try {
    series.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("series file: ") + ex.what());
  }
  return series;
}

struct EstimateOpts {
  double v_par_mm_s = 0.0;
  double v_perp_mm_s = 0.0;
  double diff_um2_ms = 1.0;
  double k_per_s = 0.0;
  double n_emitted = 1e5;
  double r_rx_um = 0.5;
  std::string series_path;
  std::string protocol;
  double t_sa_ms = 2.5;
  double tau = 2.0;
  int window = 7;
  double d_min_um = 0.01;
  double d_max_um = 20.0;
  int n_grid = 2000;
  std::uint64_t seed = 0;
};

int cmd_estimate(const EstimateOpts& opts) {
  EnvironmentParams env;
  env.v_par = units::mm_s_to_m_s(opts.v_par_mm_s);
  env.v_perp = units::mm_s_to_m_s(opts.v_perp_mm_s);
  env.diff_coeff = units::um2_ms_to_m2_s(opts.diff_um2_ms);
  env.k_degrade = opts.k_per_s;
  env.n_emitted = opts.n_emitted;
  env.r_rx = units::um_to_m(opts.r_rx_um);
  try {
    env.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("environment: ") + ex.what());
  }

  const ObservationSeries series = load_series_csv(opts.series_path);
  MlSearchSpec search;
  search.d_min = units::um_to_m(opts.d_min_um);
  search.d_max = units::um_to_m(opts.d_max_um);
  search.n_grid = opts.n_grid;
  try {
    search.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }

  auto est_rng = rng::make_stream(opts.seed, rng::Stream::kEstimator, 0);
  EstimateRecord rec;
  if (opts.protocol == "sat") {
    Eigen::Index best = 0;
    const double t_sa = units::ms_to_s(opts.t_sa_ms);
    for (Eigen::Index i = 1; i < series.size(); ++i)
      if (std::abs(series.times[i] - t_sa) < std::abs(series.times[best] - t_sa)) best = i;
    rec = sat_estimate(env, series.counts[best], series.times[best], est_rng);
  } else if (opts.protocol == "rtt") {
    rec = rtt_estimate(env, series, opts.tau, est_rng);
  } else if (opts.protocol == "envd") {
    rec = envd_estimate(env, series, opts.window, est_rng, search);
  } else if (opts.protocol == "ml") {
    rec = ml_estimate(env, series, search, est_rng);
  } else {
    throw ConfigError("unknown protocol '" + opts.protocol + "'");
  }

  std::cout << "protocol,d_hat_um,corrections,samples_used\n"
            << protocol_name(rec.protocol) << ',' << format_double(units::m_to_um(rec.d_hat))
            << ',' << rec.corrections.to_string() << ',' << rec.samples_used << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance estimation toolkit for diffusive molecular channels"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts common;
  EstimateOpts est;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", common.config_path, "config file path")->required();
    if (needs_out) cmd->add_option("--out", common.out, "output directory")->required();
    cmd->add_option("--seed", common.seed, "override the config seed");
    cmd->add_option("--realizations", common.realizations, "override realization count");
    cmd->add_option("--mode", common.mode, "override mode: particle|poisson");
  };

  CLI::App* crlb_cmd = app.add_subcommand("crlb", "single-sample estimation bound over a (d, t) grid");
  add_common(crlb_cmd, true);
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Monte Carlo sweep of all configured protocols");
  add_common(exp_cmd, true);
  CLI::App* sim_cmd = app.add_subcommand("simulate", "dump raw observation series");
  add_common(sim_cmd, true);

  CLI::App* est_cmd = app.add_subcommand("estimate", "one distance estimate from a series file");
  est_cmd->add_option("--series", est.series_path, "CSV with header t_ms,count")->required();
  est_cmd->add_option("--protocol", est.protocol, "sat|rtt|envd|ml")->required();
  est_cmd->add_option("--v-par-mm-s", est.v_par_mm_s, "flow along TX->RX, mm/s");
  est_cmd->add_option("--v-perp-mm-s", est.v_perp_mm_s, "perpendicular flow, mm/s");
  est_cmd->add_option("--diff-um2-ms", est.diff_um2_ms, "diffusion coefficient, um^2/ms");
  est_cmd->add_option("--k-per-s", est.k_per_s, "degradation rate, 1/s");
  est_cmd->add_option("--n-emitted", est.n_emitted, "molecules per impulse");
  est_cmd->add_option("--r-rx-um", est.r_rx_um, "receiver radius, um");
  est_cmd->add_option("--t-sa-ms", est.t_sa_ms, "sat observation time, ms");
  est_cmd->add_option("--tau", est.tau, "rtt count threshold");
  est_cmd->add_option("--window", est.window, "envd filter window length");
  est_cmd->add_option("--d-min-um", est.d_min_um, "search lower bound, um");
  est_cmd->add_option("--d-max-um", est.d_max_um, "search upper bound, um");
  est_cmd->add_option("--n-grid", est.n_grid, "search grid points");
  est_cmd->add_option("--seed", est.seed, "coin-toss seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (crlb_cmd->parsed()) return cmd_crlb(common);
    if (exp_cmd->parsed()) return cmd_experiment(common);
    if (sim_cmd->parsed()) return cmd_simulate(common);
    if (est_cmd->parsed()) return cmd_estimate(est);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
