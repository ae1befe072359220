#include <doctest.h>

#include <cmath>

#include "mcdist/likelihood.hpp"
#include "mcdist/random.hpp"
#include "oracles.hpp"

using namespace mcdist;

namespace {

ObservationSeries make_series(std::initializer_list<double> times_s,
                              std::initializer_list<double> counts) {
  ObservationSeries s;
  s.times = Eigen::ArrayXd(times_s.size());
  s.counts = Eigen::ArrayXd(counts.size());
  Eigen::Index i = 0;
  for (double t : times_s) s.times[i++] = t;
  i = 0;
  for (double c : counts) s.counts[i++] = c;
  return s;
}

}  // namespace

TEST_CASE("series validation") {
  CHECK_NOTHROW(make_series({1e-3, 2e-3}, {0, 3}).validate());
  CHECK_THROWS(make_series({1e-3}, {0, 3}).validate());
  CHECK_THROWS(make_series({2e-3, 1e-3}, {0, 3}).validate());
  CHECK_THROWS(make_series({0.0, 1e-3}, {0, 3}).validate());
  CHECK_THROWS(make_series({1e-3, 2e-3}, {0, -1}).validate());
}

TEST_CASE("likelihood constants factorize the expected count") {
  const EnvironmentParams env = oracle::degrading_env(4e-6, 1.5e-3);
  const auto series = make_series({0.5e-3, 1e-3, 2.5e-3, 7e-3}, {0, 0, 0, 0});
  const LikelihoodConstants c = likelihood_constants(env, series.times);
  for (double d : {1e-6, 4e-6, 9e-6}) {
    const Eigen::ArrayXd mu = expected_counts(c, d);
    for (Eigen::Index m = 0; m < series.size(); ++m)
      CHECK(mu[m] == doctest::Approx(expected_count(env, d, series.times[m])).epsilon(1e-12));
  }
  CHECK((c.phi > 0.0).all());
  CHECK((c.lambda >= 0.0).all());
}

TEST_CASE("log-likelihood single-sample reference value") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const auto series = make_series({1e-3}, {22});
  const double mu = expected_count(env, 4e-6, 1e-3);
  CHECK(mu == doctest::Approx(21.5281).epsilon(1e-4));  // frozen
  const double expected = 22.0 * std::log(mu) - mu - std::lgamma(23.0);
  CHECK(log_likelihood(env, 4e-6, series) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_likelihood(env, 4e-6, series) ==
        doctest::Approx(oracle::log_likelihood(env, 4e-6, series)).epsilon(1e-10));
}

TEST_CASE("log-likelihood of all-zero counts reduces to -sum(mu)") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const auto series = make_series({1e-3, 2e-3}, {0, 0});
  const double expected =
      -(expected_count(env, 4e-6, 1e-3) + expected_count(env, 4e-6, 2e-3));
  CHECK(log_likelihood(env, 4e-6, series) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log-likelihood peaks near the generating distance") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const double mu = expected_count(env, 4e-6, 1.2e-3);
  const auto series = make_series({1.2e-3}, {std::round(mu)});
  const double at_truth = log_likelihood(env, 4e-6, series);
  CHECK(at_truth >= log_likelihood(env, 4e-6 * 0.8, series));
  CHECK(at_truth >= log_likelihood(env, 4e-6 * 1.2, series));
}

TEST_CASE("log-likelihood sentinel when the mean underflows") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  // 1 m away after 1 ms: mean underflows to zero
  CHECK(expected_count(env, 1.0, 1e-3) == 0.0);
  const auto zero_count = make_series({1e-3}, {0});
  CHECK(log_likelihood(env, 1.0, zero_count) == 0.0);
  const auto with_count = make_series({1e-3}, {3});
  CHECK(log_likelihood(env, 1.0, with_count) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("score vanishes on mean pseudo-counts") {
  const EnvironmentParams env = oracle::degrading_env(4e-6, 1e-3);
  const auto times = Eigen::ArrayXd::LinSpaced(10, 0.5e-3, 5e-3).eval();
  ObservationSeries series;
  series.times = times;
  series.counts = expected_counts(likelihood_constants(env, times), 4e-6);
  CHECK(std::abs(score(env, 4e-6, series)) < 1e-9);
}

TEST_CASE("score matches centered finite differences of the log-likelihood") {
  auto stream = rng::make_stream(31, 0);
  const double h = 1e-9;
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
    const double fd = (log_likelihood(env, d_hyp + h, series) -
                       log_likelihood(env, d_hyp - h, series)) /
                      (2.0 * h);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("score sign points toward the generating distance") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  const double d_star = 4e-6;
  const double mu_star = expected_count(env, d_star, 1.5e-3);
  const auto series = make_series({1.5e-3}, {mu_star});
  for (double d_hyp : {1e-6, 2e-6, 3e-6, 3.9e-6})
    CHECK(score(env, d_hyp, series) > 0.0);
  for (double d_hyp : {4.1e-6, 5e-6, 8e-6})
    CHECK(score(env, d_hyp, series) < 0.0);
}

TEST_CASE("fisher information: reference value and the two algebraic forms") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  Eigen::ArrayXd t(1);
  t << 1.2e-3;
  const double info = fisher_information(env, 4e-6, t);
  CHECK(info == doctest::Approx(8.8606e13).epsilon(1e-4));  // frozen

  auto stream = rng::make_stream(32, 0);
  for (int i = 0; i < 30; ++i) {
    EnvironmentParams e = oracle::no_flow_env(0.0);
    e.v_par = (stream.uniform() - 0.4) * 3e-3;
    e.v_perp = stream.uniform() * 1e-3;
    e.k_degrade = stream.uniform() * 80.0;
    const double d = (1.0 + 8.0 * stream.uniform()) * 1e-6;
    Eigen::ArrayXd times(3);
    times << (0.4 + stream.uniform()) * 1e-3, (1.5 + stream.uniform()) * 1e-3,
        (3.0 + stream.uniform()) * 1e-3;
    // alternative form: sum (v - d/t)^2 mu / (4 D^2)
    double alt = 0.0;
    for (Eigen::Index m = 0; m < times.size(); ++m) {
      const double slope = e.v_par - d / times[m];
      alt += slope * slope * expected_count(e, d, times[m]);
    }
    alt /= 4.0 * e.diff_coeff * e.diff_coeff;
    CHECK(fisher_information(e, d, times) == doctest::Approx(alt).epsilon(1e-12));
  }
}

TEST_CASE("fisher information is additive over sample sets") {
  const EnvironmentParams env = oracle::degrading_env(4e-6, 1e-3);
  Eigen::ArrayXd a(2), b(3), both(5);
  a << 0.5e-3, 1.1e-3;
  b << 2e-3, 3e-3, 7e-3;
  both << 0.5e-3, 1.1e-3, 2e-3, 3e-3, 7e-3;
  const double sum = fisher_information(env, 4e-6, a) + fisher_information(env, 4e-6, b);
  CHECK(fisher_information(env, 4e-6, both) == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("crlb: reference value, subset ordering, emitter scaling") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  Eigen::ArrayXd t(1);
  t << 1.2e-3;
  const auto bound = crlb(env, 4e-6, t);
  REQUIRE(bound.has_value());
  CHECK(*bound == doctest::Approx(1.1286e-14).epsilon(1e-4));  // frozen, ~0.0113 um^2

  Eigen::ArrayXd more(3);
  more << 1.2e-3, 2.5e-3, 5e-3;
  CHECK(*crlb(env, 4e-6, more) < *bound);

  EnvironmentParams doubled = env;
  doubled.n_emitted *= 2.0;
  CHECK(*crlb(doubled, 4e-6, t) == doctest::Approx(*bound / 2.0).epsilon(1e-13));
}

TEST_CASE("crlb reports an unbounded result as empty") {
  const EnvironmentParams env = oracle::no_flow_env(4e-6);
  Eigen::ArrayXd t(1);
  t << 1e-3;
  CHECK_FALSE(crlb(env, 1.0, t).has_value());  // mean underflows, no information
}
