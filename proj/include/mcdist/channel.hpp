#pragma once

#include <array>
#include <cstdint>
#include <vector>

// Analytic model of the diffusive channel: expected impulse response of a
// point release observed by a passive spherical receiver, its inversion for
// distance, and the peak-time / peak-count formulas.

namespace mcdist {

// Physical description of one channel. All values strict SI.
struct EnvironmentParams {
  double d = 0.0;          // true TX-RX distance, m (ground truth; unknown to estimators)
  double v_par = 0.0;      // flow along the TX->RX line, m/s (may be negative)
  double v_perp = 0.0;     // flow perpendicular to that line, m/s (>= 0; direction immaterial)
  double diff_coeff = 0.0; // diffusion coefficient, m^2/s (> 0)
  double k_degrade = 0.0;  // first-order degradation rate, 1/s (>= 0)
  double n_emitted = 0.0;  // molecules per impulse (>= 1)
  double r_rx = 0.0;       // receiver radius, m (> 0)

  double receiver_volume() const;

  // Validates everything except d, which is unknown in estimation contexts.
  void validate() const;
};

// Which repair rule fired while inverting the impulse response.
enum class Correction : std::uint8_t {
  None = 0,
  ZeroObservation,           // s = 0 replaced by s = 0.1
  NegativeDiscriminantOrLog, // observation too large; no real solution
  NegativeRoot,              // all real solutions were negative
};

const char* correction_name(Correction c);

// Raw result of solving the impulse response for distance. Zero, one or two
// non-negative candidate distances; two are possible only with v_par > 0.
struct DistanceSolutionSet {
  std::array<double, 2> roots{};  // ascending; only the first n_roots entries valid
  int n_roots = 0;
  Correction correction = Correction::None;
};

// Expected number of molecules inside the receiver at time t > 0 after an
// impulsive release of env.n_emitted molecules at distance d.
// Underflows to 0 rather than NaN so Poisson sampling always gets a valid mean.
double expected_count(const EnvironmentParams& env, double d, double t);

// Solves expected_count(env, d, t) = s for d. Repair rules, in order:
// s = 0 is replaced by 0.1; a negative square-root argument yields no roots;
// negative roots are dropped.
DistanceSolutionSet invert_count(const EnvironmentParams& env, double s, double t);

// Decay-rate parameter combining flow and degradation, 1/s.
// Zero exactly when there is no flow and no degradation.
double eta(const EnvironmentParams& env);

// Time at which the expected count peaks, for a release at distance d > 0.
double peak_time(const EnvironmentParams& env, double d);

// Expected count at the peak. Closed form when eta == 0, otherwise evaluated
// at peak_time.
double peak_count(const EnvironmentParams& env, double d);

}  // namespace mcdist
