#include "mcdist/estimators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mcdist/likelihood.hpp"

namespace mcdist {

namespace {

constexpr double kBisectTol = 1e-10;  // m

FlagSet inherit_flags(const DistanceSolutionSet& sol) {
  FlagSet flags;
  switch (sol.correction) {
    case Correction::None: break;
    case Correction::ZeroObservation: flags.set(Flag::ZeroObservation); break;
    case Correction::NegativeDiscriminantOrLog:
      flags.set(Flag::NegativeDiscriminantOrLog);
      break;
    case Correction::NegativeRoot: flags.set(Flag::NegativeRoot); break;
  }
  return flags;
}

// Resolves a solution set into one distance: coin toss between two roots,
// d_hat = 0 when no root survived.
EstimateRecord resolve(const DistanceSolutionSet& sol, Protocol protocol,
                       rng::Xoshiro256pp& rng) {
  EstimateRecord rec;
  rec.protocol = protocol;
  rec.corrections = inherit_flags(sol);
  if (sol.n_roots == 0) {
    rec.d_hat = 0.0;
  } else if (sol.n_roots == 1) {
    rec.d_hat = sol.roots[0];
  } else {
    rec.corrections.set(Flag::CoinToss);
    rec.d_hat = sol.roots[rng.uniform() < 0.5 ? 0 : 1];
  }
  return rec;
}

template <class Compare>
Eigen::ArrayXd moving_extreme(const Eigen::ArrayXd& values, int w, Compare better) {
  if (w < 1 || w % 2 == 0)
    throw std::invalid_argument("envelope filter window must be odd and >= 1");
  const Eigen::Index n = values.size();
  const Eigen::Index half = (w - 1) / 2;
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    double best = values[lo];
    for (Eigen::Index j = lo + 1; j <= hi; ++j)
      if (better(values[j], best)) best = values[j];
    out[i] = best;
  }
  return out;
}

}  // namespace

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Sat: return "sat";
    case Protocol::Rtt: return "rtt";
    case Protocol::Envd: return "envd";
    case Protocol::Ml: return "ml";
  }
  return "unknown";
}

std::string FlagSet::to_string() const {
  static constexpr std::pair<Flag, const char*> kNames[] = {
      {Flag::ZeroObservation, "zero_observation"},
      {Flag::NegativeDiscriminantOrLog, "negative_discriminant"},
      {Flag::NegativeRoot, "negative_root"},
      {Flag::CoinToss, "coin_toss"},
      {Flag::ThresholdNeverCrossed, "threshold_never_crossed"},
      {Flag::Saturated, "saturated"},
  };
  std::string out;
  for (const auto& [flag, name] : kNames) {
    if (!has(flag)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out.empty() ? "none" : out;
}

void MlSearchSpec::validate() const {
  if (!(d_min > 0.0 && d_min < d_max))
    throw std::invalid_argument("search bounds require 0 < d_min < d_max");
  if (n_grid < 2) throw std::invalid_argument("search grid needs at least 2 points");
}

Eigen::ArrayXd moving_max(const Eigen::ArrayXd& values, int w) {
  return moving_extreme(values, w, [](double a, double b) { return a > b; });
}

Eigen::ArrayXd moving_min(const Eigen::ArrayXd& values, int w) {
  return moving_extreme(values, w, [](double a, double b) { return a < b; });
}

EstimateRecord sat_estimate(const EnvironmentParams& env, double obs_at_tsa,
                            double t_sa, rng::Xoshiro256pp& rng) {
  EstimateRecord rec = resolve(invert_count(env, obs_at_tsa, t_sa), Protocol::Sat, rng);
  rec.samples_used = 1;
  return rec;
}

EstimateRecord rtt_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                            double tau, rng::Xoshiro256pp& rng) {
  if (!(tau >= 1.0)) throw std::domain_error("rtt_estimate: tau must be >= 1");
  for (Eigen::Index m = 0; m < series.size(); ++m) {
    if (series.counts[m] >= tau) {
      // the threshold value is inverted, not the raw observation
      EstimateRecord rec =
          resolve(invert_count(env, tau, series.times[m]), Protocol::Rtt, rng);
      rec.samples_used = static_cast<int>(m) + 1;
      return rec;
    }
  }
  EstimateRecord rec;
  rec.protocol = Protocol::Rtt;
  rec.d_hat = 0.0;
  rec.corrections.set(Flag::ThresholdNeverCrossed);
  rec.samples_used = static_cast<int>(series.size());
  return rec;
}

EstimateRecord envd_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                             int w, rng::Xoshiro256pp& /*rng*/, const MlSearchSpec& bounds) {
  if (series.size() == 0) throw std::invalid_argument("envd_estimate: empty series");
  bounds.validate();
  EstimateRecord rec;
  rec.protocol = Protocol::Envd;
  rec.samples_used = static_cast<int>(series.size());

  const Eigen::ArrayXd upper = moving_max(series.counts, w);
  const Eigen::ArrayXd lower = moving_min(series.counts, w);
  double s_peak = (0.5 * (upper + lower)).maxCoeff();
  if (s_peak == 0.0) {
    rec.corrections.set(Flag::ZeroObservation);
    s_peak = 0.1;
  }

  if (eta(env) == 0.0) {
    const double d_hat = std::pow(2.0 * std::numbers::pi * std::numbers::e / 3.0, -0.5) *
                         std::cbrt(env.n_emitted * env.receiver_volume() / s_peak);
    if (d_hat > bounds.d_max) {
      rec.d_hat = bounds.d_max;
      rec.corrections.set(Flag::Saturated);
    } else {
      rec.d_hat = d_hat;
    }
    return rec;
  }

  // peak_count decreases in d; bisect peak_count(d) = s_peak over the bounds.
  double lo = bounds.d_min, hi = bounds.d_max;
  if (peak_count(env, lo) < s_peak) {
    rec.d_hat = 0.0;  // observation above any reachable peak
    rec.corrections.set(Flag::NegativeDiscriminantOrLog);
    return rec;
  }
  if (peak_count(env, hi) > s_peak) {
    rec.d_hat = hi;
    rec.corrections.set(Flag::Saturated);
    return rec;
  }
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    (peak_count(env, mid) >= s_peak ? lo : hi) = mid;
  }
  rec.d_hat = 0.5 * (lo + hi);
  return rec;
}

MlGrid make_ml_grid(const EnvironmentParams& env, const Eigen::ArrayXd& times,
                    const MlSearchSpec& spec) {
  spec.validate();
  MlGrid grid;
  grid.spec = spec;
  grid.env = env;
  grid.times = times;
  grid.d = Eigen::ArrayXd::LinSpaced(spec.n_grid, spec.d_min, spec.d_max);

  const LikelihoodConstants c = likelihood_constants(env, times);
  grid.log_lambda = log_pre_exponential(env, times);
  grid.phi = c.phi;
  grid.psi = c.psi;
  grid.mu_sum.resize(spec.n_grid);
  for (int g = 0; g < spec.n_grid; ++g)
    grid.mu_sum[g] = expected_counts(c, grid.d[g]).sum();
  return grid;
}

namespace {

// Log-likelihood up to the count-factorial term, which is constant in d.
// Uses the analytic log of mu so that underflowed hypotheses rank last
// instead of producing NaNs.
double reduced_log_likelihood(const MlGrid& grid, const Eigen::ArrayXd& counts, double d) {
  const double mu_sum =
      (grid.log_lambda - d * d * grid.phi + d * grid.psi).exp().sum();
  const double s_loglam = (counts * grid.log_lambda).sum();
  const double s_phi = (counts * grid.phi).sum();
  const double s_tot = counts.sum();
  return s_loglam - d * d * s_phi + d * grid.psi * s_tot - mu_sum;
}

double golden_section_max(const MlGrid& grid, const Eigen::ArrayXd& counts, double lo,
                          double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = reduced_log_likelihood(grid, counts, x1);
  double f2 = reduced_log_likelihood(grid, counts, x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = reduced_log_likelihood(grid, counts, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = reduced_log_likelihood(grid, counts, x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

EstimateRecord ml_estimate_with_grid(const MlGrid& grid, const ObservationSeries& series,
                                     rng::Xoshiro256pp& rng) {
  if (series.size() != grid.times.size())
    throw std::invalid_argument("ml_estimate_with_grid: series does not match the grid times");
  if (series.size() == 1) {
    EstimateRecord rec =
        resolve(invert_count(grid.env, series.counts[0], series.times[0]), Protocol::Ml, rng);
    rec.samples_used = 1;
    return rec;
  }

  EstimateRecord rec;
  rec.protocol = Protocol::Ml;
  rec.samples_used = static_cast<int>(series.size());

  // s-dependent part of the log-likelihood, vectorized over the grid:
  // sum_m s_m ln mu_m(d) = sum_m s_m ln lambda_m - d^2 sum_m s_m phi_m + d psi sum_m s_m
  const double s_loglam = (series.counts * grid.log_lambda).sum();
  const double s_phi = (series.counts * grid.phi).sum();
  const double s_tot = series.counts.sum();
  const Eigen::ArrayXd ll =
      s_loglam - grid.d.square() * s_phi + grid.d * (grid.psi * s_tot) - grid.mu_sum;

  Eigen::Index winner = 0;
  double best = ll[0];
  for (Eigen::Index g = 1; g < ll.size(); ++g) {
    if (ll[g] > best) {  // ties keep the smallest d
      best = ll[g];
      winner = g;
    }
  }

  if (winner == ll.size() - 1) {
    rec.d_hat = grid.spec.d_max;
    rec.corrections.set(Flag::Saturated);
    return rec;
  }

  rec.d_hat = grid.d[winner];
  if (grid.spec.refine) {
    const double lo = winner > 0 ? grid.d[winner - 1] : grid.spec.d_min;
    const double hi = grid.d[winner + 1];
    const double refined = golden_section_max(grid, series.counts, lo, hi);
    if (reduced_log_likelihood(grid, series.counts, refined) >= best) rec.d_hat = refined;
  }
  return rec;
}

EstimateRecord ml_estimate(const EnvironmentParams& env, const ObservationSeries& series,
                           const MlSearchSpec& spec, rng::Xoshiro256pp& rng) {
  if (series.size() == 0) throw std::invalid_argument("ml_estimate: empty series");
  if (series.size() == 1) {
    EstimateRecord rec =
        resolve(invert_count(env, series.counts[0], series.times[0]), Protocol::Ml, rng);
    rec.samples_used = 1;
    return rec;
  }
  return ml_estimate_with_grid(make_ml_grid(env, series.times, spec), series, rng);
}

}  // namespace mcdist
