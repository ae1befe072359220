#include "mcdist/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcdist {

namespace {
constexpr double kPi = std::numbers::pi;
// Substitute observation for s = 0; keeps the logarithm finite.
constexpr double kZeroObservationSubstitute = 0.1;
}  // namespace

double EnvironmentParams::receiver_volume() const {
  return (4.0 / 3.0) * kPi * r_rx * r_rx * r_rx;
}

void EnvironmentParams::validate() const {
  if (!(diff_coeff > 0.0)) throw std::domain_error("diff_coeff must be > 0");
  if (!(k_degrade >= 0.0)) throw std::domain_error("k_degrade must be >= 0");
  if (!(v_perp >= 0.0)) throw std::domain_error("v_perp must be >= 0");
  if (!(n_emitted >= 1.0)) throw std::domain_error("n_emitted must be >= 1");
  if (!(r_rx > 0.0)) throw std::domain_error("r_rx must be > 0");
}

const char* correction_name(Correction c) {
  switch (c) {
    case Correction::None: return "none";
    case Correction::ZeroObservation: return "zero_observation";
    case Correction::NegativeDiscriminantOrLog: return "negative_discriminant";
    case Correction::NegativeRoot: return "negative_root";
  }
  return "unknown";
}

double expected_count(const EnvironmentParams& env, double d, double t) {
  if (!(t > 0.0)) throw std::domain_error("expected_count: t must be > 0");
  const double dx = d - env.v_par * t;
  const double dy = env.v_perp * t;
  const double r_eff_sq = dx * dx + dy * dy;
  const double four_dt = 4.0 * env.diff_coeff * t;
  const double pre =
      env.n_emitted * env.receiver_volume() / std::pow(kPi * four_dt, 1.5);
  const double count = pre * std::exp(-env.k_degrade * t - r_eff_sq / four_dt);
  return std::isfinite(count) ? count : 0.0;
}

DistanceSolutionSet invert_count(const EnvironmentParams& env, double s, double t) {
  if (!(t > 0.0)) throw std::domain_error("invert_count: t must be > 0");
  if (s < 0.0) throw std::domain_error("invert_count: s must be >= 0");

  DistanceSolutionSet out;
  if (s == 0.0) {
    out.correction = Correction::ZeroObservation;
    s = kZeroObservationSubstitute;
  }

  const double four_dt = 4.0 * env.diff_coeff * t;
  // log form of N_EM * V_RX / (s * (4 pi D t)^{3/2}); avoids overflow
  const double log_arg = std::log(env.n_emitted * env.receiver_volume()) -
                         std::log(s) - 1.5 * std::log(kPi * four_dt);
  const double disc = four_dt * log_arg -
                      t * t * (env.v_perp * env.v_perp +
                               4.0 * env.k_degrade * env.diff_coeff);
  if (disc < 0.0) {
    if (out.correction == Correction::None)
      out.correction = Correction::NegativeDiscriminantOrLog;
    return out;
  }

  const double shift = env.v_par * t;
  const double half_width = std::sqrt(disc);
  const double lo = shift - half_width;
  const double hi = shift + half_width;
  if (hi < 0.0) {
    if (out.correction == Correction::None) out.correction = Correction::NegativeRoot;
    return out;
  }
  if (lo >= 0.0 && lo < hi) out.roots[out.n_roots++] = lo;
  out.roots[out.n_roots++] = hi;
  return out;
}

double eta(const EnvironmentParams& env) {
  return (env.v_par * env.v_par + env.v_perp * env.v_perp) / env.diff_coeff +
         4.0 * env.k_degrade;
}

double peak_time(const EnvironmentParams& env, double d) {
  if (!(d > 0.0)) throw std::domain_error("peak_time: d must be > 0");
  const double e = eta(env);
  if (e == 0.0) return d * d / (6.0 * env.diff_coeff);
  return (-3.0 + std::sqrt(9.0 + d * d * e / env.diff_coeff)) / e;
}

double peak_count(const EnvironmentParams& env, double d) {
  if (!(d > 0.0)) throw std::domain_error("peak_count: d must be > 0");
  if (eta(env) == 0.0) {
    return env.n_emitted * env.receiver_volume() * std::exp(-1.5) /
           (std::pow(2.0 * kPi / 3.0, 1.5) * d * d * d);
  }
  return expected_count(env, d, peak_time(env, d));
}

}  // namespace mcdist
