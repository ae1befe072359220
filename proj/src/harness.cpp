#include "mcdist/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mcdist/likelihood.hpp"
#include "mcdist/random.hpp"

namespace mcdist {

namespace {

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Index of the sample time closest to t; exact midpoints round down.
Eigen::Index nearest_sample(const Eigen::ArrayXd& times, double t) {
  Eigen::Index best = 0;
  double best_dist = std::abs(times[0] - t);
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    const double dist = std::abs(times[i] - t);
    if (dist < best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

std::string ProtocolSpec::label() const {
  switch (kind) {
    case Protocol::Sat: return "sat_tsa" + trim_number(t_sa * 1e3) + "ms";
    case Protocol::Rtt: return "rtt_tau" + trim_number(tau);
    case Protocol::Envd: return "envd_w" + std::to_string(window);
    case Protocol::Ml: return "ml";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  base_env.validate();
  sim.validate(base_env);
  if (sweep_values.empty()) throw std::invalid_argument("sweep values must be non-empty");
  if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
  const double window_end = sim.dt * sim.n_steps;
  for (const auto& p : protocols) {
    if (p.kind == Protocol::Sat && !(p.t_sa > 0.0 && p.t_sa <= window_end + 0.5 * sim.dt))
      throw std::invalid_argument("sat t_sa lies outside the simulated window");
    if (p.kind == Protocol::Rtt && !(p.tau >= 1.0))
      throw std::invalid_argument("rtt tau must be >= 1");
    if (p.kind == Protocol::Envd && (p.window < 1 || p.window % 2 == 0))
      throw std::invalid_argument("envd window must be odd and >= 1");
    if (p.kind == Protocol::Ml) p.ml.validate();
  }
  if (sweep == SweepKind::Distance) {
    for (double d : sweep_values)
      if (!(d > 0.0)) throw std::invalid_argument("swept distances must be > 0");
  } else {
    if (!(base_env.d > 0.0))
      throw std::invalid_argument("flow sweep requires a positive base distance");
  }
}

int flag_index(Flag f) {
  switch (f) {
    case Flag::ZeroObservation: return 0;
    case Flag::NegativeDiscriminantOrLog: return 1;
    case Flag::NegativeRoot: return 2;
    case Flag::CoinToss: return 3;
    case Flag::ThresholdNeverCrossed: return 4;
    case Flag::Saturated: return 5;
  }
  return 0;
}

void parallel_for(int n_tasks, const std::function<void(int)>& task) {
  const int workers = worker_count();
  if (workers <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        task(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

int worker_count() {
  if (const char* env = std::getenv("MCDIST_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<SweepSummary> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.protocols.empty())
    throw std::invalid_argument("run_experiment: at least one protocol is required");
  const Eigen::ArrayXd times = sample_times(cfg.sim);
  const int n_protocols = static_cast<int>(cfg.protocols.size());
  const int n_real = cfg.n_realizations;

  std::vector<SweepSummary> summaries;
  summaries.reserve(cfg.sweep_values.size());

  for (std::size_t sweep_idx = 0; sweep_idx < cfg.sweep_values.size(); ++sweep_idx) {
    EnvironmentParams env = cfg.base_env;
    if (cfg.sweep == SweepKind::Distance)
      env.d = cfg.sweep_values[sweep_idx];
    else
      env.v_par = cfg.sweep_values[sweep_idx];

    // One shared grid per ML protocol per sweep point; the per-realization
    // search reuses it.
    std::vector<std::optional<MlGrid>> ml_grids(n_protocols);
    for (int p = 0; p < n_protocols; ++p) {
      if (cfg.protocols[p].kind == Protocol::Ml && cfg.sim.n_steps > 1)
        ml_grids[p] = make_ml_grid(env, times, cfg.protocols[p].ml);
    }

    // One estimate slot per (protocol, realization); filled in any order,
    // reduced serially afterwards.
    std::vector<std::vector<EstimateRecord>> records(
        n_protocols, std::vector<EstimateRecord>(n_real));

    parallel_for(n_real, [&](int r) {
      const std::uint64_t global = sweep_idx * static_cast<std::uint64_t>(n_real) + r;
      ObservationSeries series;
      if (cfg.sim.mode == SimMode::Particle) {
        series = simulate_realization(env, cfg.sim, global);
      } else {
        series = sample_poisson_series(env, env.d, times, cfg.sim.seed, global);
      }
      if (cfg.force_mean_counts) {
        for (Eigen::Index m = 0; m < times.size(); ++m)
          series.counts[m] = expected_count(env, env.d, times[m]);
      }

      for (int p = 0; p < n_protocols; ++p) {
        const ProtocolSpec& spec = cfg.protocols[p];
        auto est_rng = rng::make_stream(cfg.sim.seed, rng::Stream::kEstimator, global,
                                        static_cast<std::uint64_t>(p));
        switch (spec.kind) {
          case Protocol::Sat: {
            const Eigen::Index m = nearest_sample(times, spec.t_sa);
            records[p][r] = sat_estimate(env, series.counts[m], times[m], est_rng);
            break;
          }
          case Protocol::Rtt:
            records[p][r] = rtt_estimate(env, series, spec.tau, est_rng);
            break;
          case Protocol::Envd:
            records[p][r] = envd_estimate(env, series, spec.window, est_rng, spec.ml);
            break;
          case Protocol::Ml:
            records[p][r] = ml_grids[p]
                                ? ml_estimate_with_grid(*ml_grids[p], series, est_rng)
                                : ml_estimate(env, series, spec.ml, est_rng);
            break;
        }
      }
    });

    SweepSummary summary;
    summary.sweep_value = cfg.sweep_values[sweep_idx];
    summary.d_true = env.d;

    for (int p = 0; p < n_protocols; ++p) {
      ProtocolSummary ps;
      ps.label = cfg.protocols[p].label();
      ps.kind = cfg.protocols[p].kind;

      double sq_sum = 0.0, d_sum = 0.0;
      for (int r = 0; r < n_real; ++r) {
        const double err = records[p][r].d_hat - env.d;
        sq_sum += err * err;
        d_sum += records[p][r].d_hat;
        const FlagSet flags = records[p][r].corrections;
        for (Flag f : {Flag::ZeroObservation, Flag::NegativeDiscriminantOrLog,
                       Flag::NegativeRoot, Flag::CoinToss, Flag::ThresholdNeverCrossed,
                       Flag::Saturated}) {
          if (flags.has(f)) ++ps.flag_counts[flag_index(f)];
        }
        if (flags.bits & ~static_cast<std::uint32_t>(Flag::CoinToss)) ++ps.n_corrections;
        if (flags.has(Flag::CoinToss)) ++ps.n_cointoss;
      }
      ps.mse = sq_sum / n_real;
      ps.bias = d_sum / n_real - env.d;
      ps.variance = ps.mse - ps.bias * ps.bias;
      if (n_real > 1) {
        double var_sq = 0.0;
        for (int r = 0; r < n_real; ++r) {
          const double err = records[p][r].d_hat - env.d;
          const double dev = err * err - ps.mse;
          var_sq += dev * dev;
        }
        ps.stderr_mse = std::sqrt(var_sq / (n_real - 1) / n_real);
      }
      summary.per_protocol.push_back(std::move(ps));
    }

    // Bounds: single sample at the first SA-T protocol's snapped time (the
    // time minimizing the bound when no SA-T is configured), and all samples.
    std::optional<double> t_m1;
    for (const auto& p : cfg.protocols) {
      if (p.kind == Protocol::Sat) {
        t_m1 = times[nearest_sample(times, p.t_sa)];
        break;
      }
    }
    if (!t_m1) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < times.size(); ++i) {
        Eigen::ArrayXd single(1);
        single << times[i];
        if (auto b = crlb(env, env.d, single); b && *b < best) {
          best = *b;
          t_m1 = times[i];
        }
      }
    }
    if (t_m1) {
      Eigen::ArrayXd single(1);
      single << *t_m1;
      summary.crlb_m1 = crlb(env, env.d, single);
    }
    summary.crlb_full = crlb(env, env.d, times);

    summaries.push_back(std::move(summary));
  }
  return summaries;
}

std::vector<CrlbPoint> crlb_curve(const EnvironmentParams& env,
                                  const std::vector<double>& distances,
                                  const std::vector<double>& times) {
  env.validate();
  std::vector<CrlbPoint> points;
  points.reserve(distances.size() * times.size());
  Eigen::ArrayXd single(1);
  for (double d : distances) {
    for (double t : times) {
      single << t;
      points.push_back({d, t, crlb(env, d, single)});
    }
  }
  return points;
}

}  // namespace mcdist
