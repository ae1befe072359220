#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mcdist/channel.hpp"
#include "mcdist/observation.hpp"

// Particle-based stochastic simulator: impulsive release, Brownian motion
// with steady drift, first-order degradation, and a passive spherical
// observer counted at the end of every step.

namespace mcdist {

enum class SimMode : std::uint8_t {
  Particle,        // track every molecule
  PoissonAnalytic  // draw counts from the analytic means
};

struct SimConfig {
  double dt = 1e-4;        // s
  int n_steps = 200;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::Particle;

  // Needs the environment for the k * dt < 1 Bernoulli constraint.
  void validate(const EnvironmentParams& env) const;
};

// Sample times {dt, 2 dt, ..., n_steps * dt}.
Eigen::ArrayXd sample_times(const SimConfig& cfg);

// One particle-mode realization. Particles start at (-env.d, 0, 0) with the
// receiver centered at the origin; per step each survivor moves by the drift
// plus N(0, 2 D dt) per axis, then degrades with probability k * dt.
// Bit-identical for fixed (cfg.seed, realization_index) regardless of
// scheduling.
ObservationSeries simulate_realization(const EnvironmentParams& env, const SimConfig& cfg,
                                       std::uint64_t realization_index);

// Same trajectory as simulate_realization, additionally reporting the final
// positions of the surviving particles.
struct SimResult {
  ObservationSeries series;
  Eigen::ArrayXd x, y, z;  // survivors only, length = survivor count
};

SimResult simulate_realization_full(const EnvironmentParams& env, const SimConfig& cfg,
                                    std::uint64_t realization_index);

// Fast mode: independent Poisson counts with the analytic means.
ObservationSeries sample_poisson_series(const EnvironmentParams& env, double d,
                                        const Eigen::ArrayXd& times, std::uint64_t seed,
                                        std::uint64_t realization_index);

}  // namespace mcdist
