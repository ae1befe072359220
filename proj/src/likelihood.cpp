#include "mcdist/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mcdist {

void ObservationSeries::validate() const {
  if (times.size() != counts.size())
    throw std::invalid_argument("ObservationSeries: length mismatch");
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("ObservationSeries: times must be > 0");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("ObservationSeries: times must be strictly increasing");
    if (!(counts[i] >= 0.0)) throw std::invalid_argument("ObservationSeries: counts must be >= 0");
  }
}

LikelihoodConstants likelihood_constants(const EnvironmentParams& env,
                                         const Eigen::ArrayXd& times) {
  LikelihoodConstants c;
  const double v_sq = env.v_par * env.v_par + env.v_perp * env.v_perp;
  const double nv = env.n_emitted * env.receiver_volume();
  c.lambda = times.unaryExpr([&](double t) {
    return nv / std::pow(4.0 * std::numbers::pi * env.diff_coeff * t, 1.5) *
           std::exp(-env.k_degrade * t - t * v_sq / (4.0 * env.diff_coeff));
  });
  c.phi = 1.0 / (4.0 * env.diff_coeff * times);
  c.psi = env.v_par / (2.0 * env.diff_coeff);
  return c;
}

Eigen::ArrayXd log_pre_exponential(const EnvironmentParams& env,
                                   const Eigen::ArrayXd& times) {
  const double v_sq = env.v_par * env.v_par + env.v_perp * env.v_perp;
  const double log_nv = std::log(env.n_emitted * env.receiver_volume());
  return times.unaryExpr([&](double t) {
    return log_nv - 1.5 * std::log(4.0 * std::numbers::pi * env.diff_coeff * t) -
           env.k_degrade * t - t * v_sq / (4.0 * env.diff_coeff);
  });
}

Eigen::ArrayXd expected_counts(const LikelihoodConstants& c, double d) {
  return c.lambda * (-d * d * c.phi + d * c.psi).exp();
}

double log_likelihood(const EnvironmentParams& env, double d_hypothesis,
                      const ObservationSeries& obs) {
  if (!(d_hypothesis >= 0.0))
    throw std::domain_error("log_likelihood: d_hypothesis must be >= 0");
  double ll = 0.0;
  for (Eigen::Index m = 0; m < obs.size(); ++m) {
    const double mu = expected_count(env, d_hypothesis, obs.times[m]);
    const double s = obs.counts[m];
    if (mu <= 0.0) {
      if (s > 0.0) return -std::numeric_limits<double>::infinity();
      continue;  // 0 * ln 0 -> 0
    }
    ll += s * std::log(mu) - mu - std::lgamma(s + 1.0);
  }
  return ll;
}

double score(const EnvironmentParams& env, double d_hypothesis,
             const ObservationSeries& obs) {
  if (!(d_hypothesis > 0.0)) throw std::domain_error("score: d_hypothesis must be > 0");
  const LikelihoodConstants c = likelihood_constants(env, obs.times);
  const Eigen::ArrayXd mu = expected_counts(c, d_hypothesis);
  const Eigen::ArrayXd slope = c.psi - 2.0 * c.phi * d_hypothesis;
  return ((obs.counts - mu) * slope).sum();
}

double fisher_information(const EnvironmentParams& env, double d,
                          const Eigen::ArrayXd& times) {
  if (!(d > 0.0)) throw std::domain_error("fisher_information: d must be > 0");
  const LikelihoodConstants c = likelihood_constants(env, times);
  const Eigen::ArrayXd mu = expected_counts(c, d);
  const Eigen::ArrayXd slope = c.psi - 2.0 * c.phi * d;
  return (slope.square() * mu).sum();
}

std::optional<double> crlb(const EnvironmentParams& env, double d,
                           const Eigen::ArrayXd& times) {
  const double info = fisher_information(env, d, times);
  if (!(info > 0.0)) return std::nullopt;
  return 1.0 / info;
}

}  // namespace mcdist
