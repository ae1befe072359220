// Acceptance suite: every release gate in one binary, one PASS/FAIL line per
// criterion. Exits non-zero if any criterion fails.
//
// MCDIST_ACCEPT_REALIZATIONS overrides the particle-calibration scale
// (default 1000; 10000 reproduces the full published scale).

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "mcdist/version.hpp"

#include "mcdist/channel.hpp"
#include "mcdist/csv.hpp"
#include "mcdist/estimators.hpp"
#include "mcdist/harness.hpp"
#include "mcdist/likelihood.hpp"
#include "mcdist/particle.hpp"
#include "mcdist/random.hpp"
#include "mcdist/units.hpp"
#include "oracles.hpp"

using namespace mcdist;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
  if (!pass) ++g_failures;
}

void note(const std::string& text) { std::printf("       note: %s\n", text.c_str()); }

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

int accept_realizations() {
  if (const char* env = std::getenv("MCDIST_ACCEPT_REALIZATIONS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n);
  }
  return 1000;
}

ProtocolSpec sat_spec(double t_sa = 2.5e-3) {
  ProtocolSpec p;
  p.kind = Protocol::Sat;
  p.t_sa = t_sa;
  return p;
}

ProtocolSpec rtt_spec(double tau = 2.0) {
  ProtocolSpec p;
  p.kind = Protocol::Rtt;
  p.tau = tau;
  return p;
}

ProtocolSpec envd_spec(int w = 7) {
  ProtocolSpec p;
  p.kind = Protocol::Envd;
  p.window = w;
  return p;
}

ProtocolSpec ml_spec() {
  ProtocolSpec p;
  p.kind = Protocol::Ml;
  return p;
}

// 1. Peak time of the no-flow reference channel at d = 4 um.
void criterion_peak_time() {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const double t_max = peak_time(env, 4e-6);
  const bool pass = t_max >= 2.66e-3 && t_max <= 2.67e-3;
  report(1, pass, fmt("peak time at 4 um = %.4f ms (required 2.66-2.67 ms)", t_max * 1e3));
}

// 2. Peak counts with the quarter-micron receiver radius.
void criterion_peak_count() {
  const double no_flow = peak_count(oracle::no_flow_env(4e-6, 0.25e-6), 4e-6);
  const double degrading = peak_count(oracle::degrading_env(4e-6, 0.0, 0.25e-6), 4e-6);
  const bool pass =
      no_flow >= 7.4 && no_flow <= 7.6 && degrading >= 6.3 && degrading <= 6.6;
  report(2, pass,
         fmt("peak counts %.3f (required 7.4-7.6) and %.3f (required 6.3-6.6) at r_rx = 0.25 um",
             no_flow, degrading));
  note(fmt("reference values 7.5/6.5 correspond to r_rx = 0.25 um; the tabulated "
           "r_rx = 0.5 um gives %.1f and %.1f",
           peak_count(oracle::no_flow_env(4e-6), 4e-6),
           peak_count(oracle::degrading_env(4e-6, 0.0), 4e-6)));
}

// 3. Shape of the single-sample bound over time and distance.
void criterion_crlb_shape() {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  auto curve_min = [&](double d, double* argmin) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
      Eigen::ArrayXd t(1);
      t << i * 1e-4;
      const auto b = crlb(env, d, t);
      if (b && *b < best) {
        best = *b;
        if (argmin) *argmin = t[0];
      }
    }
    return best;
  };

  double t_at_min = 0.0;
  const double min4 = curve_min(4e-6, &t_at_min);
  const double min2 = curve_min(2e-6, nullptr);

  bool crossing = true;
  for (int i = 26; i <= 200; ++i) {  // t > 2.5 ms
    Eigen::ArrayXd t(1);
    t << i * 1e-4;
    if (!(*crlb(env, 2e-6, t) > *crlb(env, 4e-6, t))) crossing = false;
  }

  const bool pass =
      t_at_min >= 1.0e-3 && t_at_min <= 1.5e-3 && min2 * 10.0 < min4 && crossing;
  report(3, pass,
         fmt("bound minimum at %.2f ms (required 1.0-1.5); min(2um)/min(4um) = %.4f "
             "(required < 0.1); late-time crossing %s",
             t_at_min * 1e3, min2 / min4, crossing ? "holds" : "violated"));
}

// 4. Regularity of the score and the information identity, Monte Carlo.
void criterion_regularity() {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const double d = 4e-6;
  const double t = 1.2e-3;
  const double mu = expected_count(env, d, t);
  const double info = fisher_information(env, d, (Eigen::ArrayXd(1) << t).finished());

  ObservationSeries obs;
  obs.times = (Eigen::ArrayXd(1) << t).finished();
  obs.counts.resize(1);

  auto stream = rng::make_stream(8801, 1);
  const int n_mean = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n_mean; ++i) {
    obs.counts[0] = static_cast<double>(rng::poisson(stream, mu));
    const double s = score(env, d, obs);
    sum += s;
    sq += s * s;
  }
  const double mean_score = sum / n_mean;
  const double var_score = sq / n_mean - mean_score * mean_score;
  const double se = std::sqrt(var_score / n_mean);
  const bool mean_ok = std::abs(mean_score) < 3.0 * se;

  const int n_var = 1000000;
  sum = 0.0;
  sq = 0.0;
  for (int i = 0; i < n_var; ++i) {
    obs.counts[0] = static_cast<double>(rng::poisson(stream, mu));
    const double s = score(env, d, obs);
    sum += s;
    sq += s * s;
  }
  const double big_mean = sum / n_var;
  const double ratio = (sq / n_var - big_mean * big_mean) / info;
  const bool var_ok = ratio >= 0.98 && ratio <= 1.02;

  report(4, mean_ok && var_ok,
         fmt("mean score %.3g (|.| < 3 se = %.3g); var(score)/information = %.4f "
             "(required 0.98-1.02)",
             mean_score, 3.0 * se, ratio));
}

// 5. Analytic score against centered finite differences.
void criterion_score_fd() {
  auto stream = rng::make_stream(8802, 1);
  const double h = 1e-9;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    EnvironmentParams env = oracle::no_flow_env(0.0);
    env.diff_coeff = (0.5 + stream.uniform()) * 1e-9;
    env.v_par = (stream.uniform() - 0.3) * 2e-3;
    env.v_perp = stream.uniform() * 1e-3;
    env.k_degrade = stream.uniform() * 100.0;
    const double d_true = (2.0 + 6.0 * stream.uniform()) * 1e-6;
    const double d_hyp = d_true * (0.7 + 0.15 * stream.uniform());

    const int m_count = 1 + static_cast<int>(stream.uniform() * 20);
    ObservationSeries series;
    series.times = Eigen::ArrayXd::LinSpaced(m_count, 0.8e-3, 6e-3);
    series.counts.resize(m_count);
    for (int m = 0; m < m_count; ++m)
      series.counts[m] = static_cast<double>(
          rng::poisson(stream, expected_count(env, d_true, series.times[m])));

    const double analytic = score(env, d_hyp, series);
    const double fd =
        (log_likelihood(env, d_hyp + h, series) - log_likelihood(env, d_hyp - h, series)) /
        (2.0 * h);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
    worst = std::max(worst, rel);
  }
  report(5, worst < 1e-4,
         fmt("worst relative gap to finite differences %.3g over 20 instances "
             "(required < 1e-4)",
             worst));
}

// 6. Particle-simulator calibration, verbatim: mean counts within 10% of the
// analytic impulse response wherever its value is >= 1, plus displacement
// variance and survivor checks.
void criterion_particle_calibration() {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  SimConfig cfg;
  cfg.seed = 8803;
  const int n_real = accept_realizations();

  std::vector<Eigen::ArrayXd> per_real(n_real);
  parallel_for(n_real, [&](int r) { per_real[r] = simulate_realization(env, cfg, r).counts; });
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(cfg.n_steps);
  for (int r = 0; r < n_real; ++r) mean += per_real[r];
  mean /= n_real;

  int checked = 0, violations = 0;
  double worst = 0.0, worst_t = 0.0;
  for (int i = 0; i < cfg.n_steps; ++i) {
    const double t = (i + 1) * cfg.dt;
    const double mu = expected_count(env, env.d, t);
    if (mu < 1.0) continue;
    ++checked;
    const double dev = std::abs(mean[i] / mu - 1.0);
    if (dev > worst) {
      worst = dev;
      worst_t = t;
    }
    if (dev > 0.10) {
      ++violations;
      note(fmt("t = %.1f ms: simulated mean %.3f vs analytic %.3f (%+.1f%%); exact "
               "sphere average %.3f",
               t * 1e3, mean[i], mu, 100.0 * (mean[i] / mu - 1.0),
               oracle::exact_sphere_mean(env, env.d, t)));
    }
  }

  // displacement variance, one realization far from the receiver
  EnvironmentParams far = oracle::no_flow_env(50e-6);
  SimConfig short_cfg;
  short_cfg.n_steps = 20;
  short_cfg.seed = 8804;
  const auto cloud = simulate_realization_full(far, short_cfg, 0);
  const double expect_var = 2.0 * far.diff_coeff * short_cfg.n_steps * short_cfg.dt;
  const double n = static_cast<double>(cloud.y.size());
  const double var_y = (cloud.y - cloud.y.mean()).square().sum() / (n - 1.0);
  const bool disp_ok =
      std::abs(var_y - expect_var) < 4.0 * expect_var * std::sqrt(2.0 / (n - 1.0));

  // survivor thinning under degradation
  EnvironmentParams degrading = far;
  degrading.k_degrade = 62.5;
  const auto survivors = simulate_realization_full(degrading, cfg, 0);
  const double p_survive = std::pow(1.0 - degrading.k_degrade * cfg.dt, cfg.n_steps);
  const double expect_n = far.n_emitted * p_survive;
  const double sd_n = std::sqrt(far.n_emitted * p_survive * (1.0 - p_survive));
  const bool surv_ok = std::abs(survivors.x.size() - expect_n) < 4.0 * sd_n;

  const bool pass = violations == 0 && disp_ok && surv_ok;
  report(6, pass,
         fmt("%d realizations: %d/%d sample times outside 10%% of the analytic mean "
             "(worst %.1f%% at %.1f ms); displacement variance %s; survivors %s",
             n_real, violations, checked, worst * 100.0, worst_t * 1e3,
             disp_ok ? "ok" : "off", surv_ok ? "ok" : "off"));
  if (violations > 0)
    note("the analytic response is a center-point approximation; at this geometry it "
         "sits >10% below the exact sphere average for t <= 0.8 ms, so these early "
         "points cannot meet the stated tolerance with a correct simulator (the "
         "simulated means match the exact averages above)");
}

// 7. Protocol ordering and bound proximity at desk scale, Poisson mode.
void criterion_protocol_ordering() {
  ExperimentConfig cfg;
  cfg.base_env = oracle::no_flow_env(4e-6);
  cfg.sweep = SweepKind::Distance;
  for (int d = 2; d <= 10; ++d) cfg.sweep_values.push_back(d * 1e-6);
  cfg.n_realizations = 1000;
  cfg.sim.mode = SimMode::PoissonAnalytic;
  cfg.sim.seed = 8805;
  cfg.protocols = {sat_spec(), rtt_spec(), envd_spec(), ml_spec()};

  const auto summaries = run_experiment(cfg);
  bool ordering = true, ml_close = true, sat_close = true;
  std::string detail;
  for (const auto& s : summaries) {
    const auto& sat = s.per_protocol[0];
    const auto& ml = s.per_protocol[3];
    for (int p = 0; p < 3; ++p) {
      const auto& other = s.per_protocol[p];
      const double slack = 2.0 * std::sqrt(ml.stderr_mse * ml.stderr_mse +
                                           other.stderr_mse * other.stderr_mse);
      if (!(ml.mse <= other.mse + slack)) {
        ordering = false;
        detail += fmt(" [ml > %s at %.0f um]", other.label.c_str(), s.d_true * 1e6);
      }
    }
    if (s.d_true == 4e-6 && s.crlb_full && !(ml.mse <= 3.0 * *s.crlb_full)) ml_close = false;
    if (s.d_true <= 4e-6 && s.crlb_m1 && !(sat.mse <= 2.0 * *s.crlb_m1)) {
      sat_close = false;
      detail += fmt(" [sat %.3g vs bound %.3g at %.0f um]", s.per_protocol[0].mse,
                    *s.crlb_m1, s.d_true * 1e6);
    }
  }
  const auto& at4 = summaries[2];
  report(7, ordering && ml_close && sat_close,
         fmt("ml is the floor at all 9 distances%s; at 4 um ml mse/bound = %.2f "
             "(required < 3), sat mse/bound(1 sample) = %.2f (required < 2 for d <= 4 um)",
             detail.c_str(), at4.per_protocol[3].mse / *at4.crlb_full,
             at4.per_protocol[0].mse / *at4.crlb_m1));
}

// 8. Single-sample maximum likelihood is the fixed-time inversion.
void criterion_single_sample_equivalence() {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const double t = 2.5e-3;
  const double mu = expected_count(env, 4e-6, t);
  auto draws = rng::make_stream(8806, 1);
  int mismatches = 0, corrected = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = static_cast<double>(rng::poisson(draws, mu));
    ObservationSeries series;
    series.times = (Eigen::ArrayXd(1) << t).finished();
    series.counts = (Eigen::ArrayXd(1) << s).finished();
    auto toss_a = rng::make_stream(8807, 2, i);
    auto toss_b = rng::make_stream(8807, 2, i);
    const auto a = sat_estimate(env, s, t, toss_a);
    const auto b = ml_estimate(env, series, MlSearchSpec{}, toss_b);
    if (a.corrections.any() || b.corrections.any()) {
      ++corrected;
      continue;
    }
    if (a.d_hat != b.d_hat) ++mismatches;
  }
  report(8, mismatches == 0,
         fmt("%d/1000 uncorrected realizations differ between the single-sample ml and "
             "the fixed-time inversion (%d corrected)",
             mismatches, corrected));
}

// 9. Zero-observation repairs at long range bias the fixed-time protocol.
void criterion_bias_emergence() {
  ExperimentConfig cfg;
  cfg.base_env = oracle::no_flow_env(4e-6);
  cfg.sweep = SweepKind::Distance;
  cfg.sweep_values = {9e-6, 10e-6};
  cfg.n_realizations = 1000;
  cfg.sim.mode = SimMode::PoissonAnalytic;
  cfg.sim.seed = 8808;
  cfg.protocols = {sat_spec()};

  const auto summaries = run_experiment(cfg);
  bool pass = true;
  std::string detail;
  for (const auto& s : summaries) {
    const auto& sat = s.per_protocol[0];
    const double zero_rate =
        static_cast<double>(sat.flag_counts[flag_index(Flag::ZeroObservation)]) /
        cfg.n_realizations;
    // 5-sigma significance of the empirical bias
    const double sd = std::sqrt(std::max(sat.variance, 0.0));
    const double bias_sigmas =
        std::abs(sat.bias) / (sd / std::sqrt(static_cast<double>(cfg.n_realizations)));
    if (!(zero_rate > 0.10) || !(bias_sigmas > 5.0)) pass = false;
    detail += fmt(" [d=%.0fum: zero rate %.0f%%, bias %.3f um at %.0f sigma]",
                  s.d_true * 1e6, zero_rate * 100.0, sat.bias * 1e6, bias_sigmas);
  }
  report(9, pass, "long-range zero-observation repairs dominate and bias the estimate:" + detail);
}

// 10. Byte-identical reruns across thread counts.
void criterion_determinism() {
  ExperimentConfig cfg;
  cfg.base_env = oracle::no_flow_env(4e-6);
  cfg.sweep = SweepKind::Distance;
  cfg.sweep_values = {2e-6, 6e-6};
  cfg.n_realizations = 200;
  cfg.sim.mode = SimMode::PoissonAnalytic;
  cfg.sim.seed = 8809;
  cfg.protocols = {sat_spec(), rtt_spec(), envd_spec(), ml_spec()};

  setenv("MCDIST_THREADS", "1", 1);
  const std::string serial = mse_sweep_csv(run_experiment(cfg), cfg.sweep) +
                             crlb_summary_csv(run_experiment(cfg), cfg.sweep);
  setenv("MCDIST_THREADS", "2", 1);
  const std::string threaded = mse_sweep_csv(run_experiment(cfg), cfg.sweep) +
                               crlb_summary_csv(run_experiment(cfg), cfg.sweep);
  setenv("MCDIST_THREADS", "3", 1);
  const std::string wide = mse_sweep_csv(run_experiment(cfg), cfg.sweep) +
                           crlb_summary_csv(run_experiment(cfg), cfg.sweep);
  unsetenv("MCDIST_THREADS");

  // a particle-mode rerun as well, small scale
  ExperimentConfig pcfg = cfg;
  pcfg.base_env.n_emitted = 1000;
  pcfg.sweep_values = {3e-6};
  pcfg.n_realizations = 40;
  pcfg.sim.mode = SimMode::Particle;
  pcfg.sim.n_steps = 50;
  setenv("MCDIST_THREADS", "2", 1);
  const std::string particle_a = mse_sweep_csv(run_experiment(pcfg), pcfg.sweep);
  setenv("MCDIST_THREADS", "1", 1);
  const std::string particle_b = mse_sweep_csv(run_experiment(pcfg), pcfg.sweep);
  unsetenv("MCDIST_THREADS");

  const bool pass = serial == threaded && serial == wide && particle_a == particle_b;
  report(10, pass, "rerun CSV bytes identical across 1, 2 and 3 worker threads");
}

}  // namespace

int main() {
  std::printf("acceptance suite (toolkit %s)\n", kVersion);
  criterion_peak_time();
  criterion_peak_count();
  criterion_crlb_shape();
  criterion_regularity();
  criterion_score_fd();
  criterion_particle_calibration();
  criterion_protocol_ordering();
  criterion_single_sample_equivalence();
  criterion_bias_emergence();
  criterion_determinism();
  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
