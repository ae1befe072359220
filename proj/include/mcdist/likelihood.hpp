#pragma once

#include <Eigen/Dense>
#include <optional>

#include "mcdist/channel.hpp"
#include "mcdist/observation.hpp"

// Poisson joint likelihood of the receiver's observations, its score function,
// Fisher information, and the resulting lower bound on the variance of any
// unbiased distance estimator.

namespace mcdist {

// Per-sample constants of the likelihood: the expected count factorizes as
// mu_m = lambda_m * exp(-d^2 * phi_m + d * psi).
struct LikelihoodConstants {
  Eigen::ArrayXd lambda;  // pre-exponential factor per sample, dimensionless
  Eigen::ArrayXd phi;     // 1 / (4 D t_m), 1/m^2
  double psi = 0.0;       // v_par / (2 D), 1/m
};

LikelihoodConstants likelihood_constants(const EnvironmentParams& env,
                                         const Eigen::ArrayXd& times);

// ln(lambda_m), evaluated analytically so it stays finite even where the
// pre-exponential factor itself would underflow.
Eigen::ArrayXd log_pre_exponential(const EnvironmentParams& env,
                                   const Eigen::ArrayXd& times);

// Expected counts mu_m at a hypothesised distance, via the factorized form.
Eigen::ArrayXd expected_counts(const LikelihoodConstants& c, double d);

// Joint Poisson log-likelihood of the observed counts at a hypothesised
// distance. Counts may be real-valued pseudo-counts. Returns -inf when some
// count is positive while its expected value underflowed to zero.
double log_likelihood(const EnvironmentParams& env, double d_hypothesis,
                      const ObservationSeries& obs);

// d/dd of the log-likelihood at the hypothesised distance.
double score(const EnvironmentParams& env, double d_hypothesis,
             const ObservationSeries& obs);

// Fisher information about d carried by samples at the given times, 1/m^2.
double fisher_information(const EnvironmentParams& env, double d,
                          const Eigen::ArrayXd& times);

// Lower bound on the variance of any unbiased distance estimator, m^2.
// Empty when the information is zero (the bound is unbounded).
std::optional<double> crlb(const EnvironmentParams& env, double d,
                           const Eigen::ArrayXd& times);

}  // namespace mcdist
