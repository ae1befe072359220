#include "mcdist/particle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcdist/random.hpp"

namespace mcdist {

void SimConfig::validate(const EnvironmentParams& env) const {
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
  if (n_steps < 1) throw std::invalid_argument("SimConfig: n_steps must be >= 1");
  if (!(env.k_degrade * dt < 1.0))
    throw std::invalid_argument("SimConfig: k * dt must be < 1");
}

Eigen::ArrayXd sample_times(const SimConfig& cfg) {
  return Eigen::ArrayXd::LinSpaced(cfg.n_steps, cfg.dt, cfg.n_steps * cfg.dt);
}

namespace {

SimResult run_particles(const EnvironmentParams& env, const SimConfig& cfg,
                        std::uint64_t realization_index, bool keep_positions) {
  env.validate();
  cfg.validate(env);
  if (!(env.d > 0.0)) throw std::domain_error("simulate_realization: env.d must be > 0");

  auto stream = rng::make_stream(cfg.seed, rng::Stream::kParticleSim, realization_index);
  const auto& normal = rng::ziggurat();

  const int n = static_cast<int>(env.n_emitted);
  std::vector<double> x(n, -env.d), y(n, 0.0), z(n, 0.0);

  const double sigma = std::sqrt(2.0 * env.diff_coeff * cfg.dt);
  const double drift_x = env.v_par * cfg.dt;
  const double drift_y = env.v_perp * cfg.dt;
  const double r_sq = env.r_rx * env.r_rx;
  const double p_degrade = env.k_degrade * cfg.dt;

  SimResult out;
  out.series.times = sample_times(cfg);
  out.series.counts.resize(cfg.n_steps);

  int alive = n;
  for (int step = 0; step < cfg.n_steps; ++step) {
    long inside = 0;
    if (p_degrade > 0.0) {
      for (int i = 0; i < alive;) {
        x[i] += drift_x + sigma * normal(stream);
        y[i] += drift_y + sigma * normal(stream);
        z[i] += sigma * normal(stream);
        if (stream.uniform() < p_degrade) {
          --alive;
          x[i] = x[alive];
          y[i] = y[alive];
          z[i] = z[alive];
          continue;  // the swapped-in particle still has to move this step
        }
        inside += (x[i] * x[i] + y[i] * y[i] + z[i] * z[i] <= r_sq);
        ++i;
      }
    } else {
      for (int i = 0; i < alive; ++i) {
        x[i] += drift_x + sigma * normal(stream);
        y[i] += drift_y + sigma * normal(stream);
        z[i] += sigma * normal(stream);
        inside += (x[i] * x[i] + y[i] * y[i] + z[i] * z[i] <= r_sq);
      }
    }
    out.series.counts[step] = static_cast<double>(inside);
  }
  if (keep_positions) {
    out.x = Eigen::Map<Eigen::ArrayXd>(x.data(), alive);
    out.y = Eigen::Map<Eigen::ArrayXd>(y.data(), alive);
    out.z = Eigen::Map<Eigen::ArrayXd>(z.data(), alive);
  }
  return out;
}

}  // namespace

ObservationSeries simulate_realization(const EnvironmentParams& env, const SimConfig& cfg,
                                       std::uint64_t realization_index) {
  return run_particles(env, cfg, realization_index, false).series;
}

SimResult simulate_realization_full(const EnvironmentParams& env, const SimConfig& cfg,
                                    std::uint64_t realization_index) {
  return run_particles(env, cfg, realization_index, true);
}

ObservationSeries sample_poisson_series(const EnvironmentParams& env, double d,
                                        const Eigen::ArrayXd& times, std::uint64_t seed,
                                        std::uint64_t realization_index) {
  env.validate();
  auto stream = rng::make_stream(seed, rng::Stream::kPoissonSeries, realization_index);
  ObservationSeries series;
  series.times = times;
  series.counts.resize(times.size());
  for (Eigen::Index m = 0; m < times.size(); ++m) {
    const double mu = expected_count(env, d, times[m]);
    series.counts[m] = static_cast<double>(rng::poisson(stream, mu));
  }
  return series;
}

}  // namespace mcdist
