#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "mcdist/channel.hpp"
#include "mcdist/observation.hpp"
#include "mcdist/random.hpp"

// The four distance estimators: single-observation inversion at a fixed time
// (SA-T), first threshold crossing (RTT-T), envelope peak detection (ENVD),
// and maximum likelihood over all samples (ML).

namespace mcdist {

enum class Protocol : std::uint8_t { Sat, Rtt, Envd, Ml };

const char* protocol_name(Protocol p);

// Repairs and decisions applied on the way to an estimate.
enum class Flag : std::uint32_t {
  ZeroObservation = 1u << 0,
  NegativeDiscriminantOrLog = 1u << 1,
  NegativeRoot = 1u << 2,
  CoinToss = 1u << 3,
  ThresholdNeverCrossed = 1u << 4,
  Saturated = 1u << 5,
};

struct FlagSet {
  std::uint32_t bits = 0;

  void set(Flag f) { bits |= static_cast<std::uint32_t>(f); }
  bool has(Flag f) const { return bits & static_cast<std::uint32_t>(f); }
  bool any() const { return bits != 0; }

  // '|'-joined flag names, or "none".
  std::string to_string() const;
};

struct EstimateRecord {
  double d_hat = 0.0;  // m; finite and >= 0, all corrections applied
  Protocol protocol = Protocol::Sat;
  FlagSet corrections;
  int samples_used = 0;
};

// Bounded 1-d search used by ML and by ENVD's numeric branch.
struct MlSearchSpec {
  double d_min = 0.01e-6;  // m
  double d_max = 20e-6;    // m
  int n_grid = 2000;
  bool refine = true;  // golden-section pass inside the winning grid cell

  void validate() const;
};

// Moving maximum / minimum with a centered, edge-truncated window of odd
// length w.
Eigen::ArrayXd moving_max(const Eigen::ArrayXd& values, int w);
Eigen::ArrayXd moving_min(const Eigen::ArrayXd& values, int w);

// Inverts the single observation made at the pre-agreed time t_sa.
EstimateRecord sat_estimate(const EnvironmentParams& env, double obs_at_tsa,
                            double t_sa, rng::Xoshiro256pp& rng);

// Inverts (tau, t_m) at the first sample m with counts[m] >= tau.
EstimateRecord rtt_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                            double tau, rng::Xoshiro256pp& rng);

// Takes the peak of the mean of the two envelopes as the peak expected count
// and maps it back through the peak-time formula. Closed form without flow
// and degradation, bisection over [bounds.d_min, bounds.d_max] otherwise.
EstimateRecord envd_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                             int w, rng::Xoshiro256pp& rng,
                             const MlSearchSpec& bounds = MlSearchSpec{});

// Precomputed grid for repeated ML estimates against the same environment and
// sample times.
struct MlGrid {
  Eigen::ArrayXd d;        // grid distances, ascending
  Eigen::ArrayXd mu_sum;   // sum over samples of mu_m(d) per grid point
  Eigen::ArrayXd log_lambda;
  Eigen::ArrayXd phi;
  double psi = 0.0;
  MlSearchSpec spec;
  EnvironmentParams env;
  Eigen::ArrayXd times;
};

MlGrid make_ml_grid(const EnvironmentParams& env, const Eigen::ArrayXd& times,
                    const MlSearchSpec& spec);

// Maximum likelihood estimate. One sample reduces to the closed-form
// inversion (the SA-T rule); several samples use a discretized search over
// [d_min, d_max].
EstimateRecord ml_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                           const MlSearchSpec& spec, rng::Xoshiro256pp& rng);

// Grid-reusing variant; series.times must match grid.times.
EstimateRecord ml_estimate_with_grid(const MlGrid& grid, const ObservationSeries& series,
                                     rng::Xoshiro256pp& rng);

}  // namespace mcdist
