#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/estimators.hpp"
#include "mcdist/particle.hpp"

// Monte Carlo experiment runner: sweeps distance or parallel flow, feeds each
// realization to every configured protocol, and aggregates MSE / bias /
// variance next to the corresponding estimation bounds.

namespace mcdist {

enum class SweepKind : std::uint8_t { Distance, FlowParallel };

struct ProtocolSpec {
  Protocol kind = Protocol::Sat;
  double t_sa = 2.5e-3;  // Sat: pre-agreed observation time, s
  double tau = 2.0;      // Rtt: count threshold
  int window = 7;        // Envd: envelope filter window length
  MlSearchSpec ml;       // Ml grid; also the Envd numeric-branch bounds

  // Distinguishes repeated protocols of the same kind in CSV output,
  // e.g. "envd_w7", "sat_tsa2.5ms".
  std::string label() const;
};

struct ExperimentConfig {
  EnvironmentParams base_env;  // the swept field is overwritten per sweep value
  SweepKind sweep = SweepKind::Distance;
  std::vector<double> sweep_values;  // m (distance) or m/s (flow)
  int n_realizations = 1000;
  SimConfig sim;
  std::vector<ProtocolSpec> protocols;

  // Test hook: replace sampled counts by their real-valued means.
  bool force_mean_counts = false;

  void validate() const;
};

// Number of flag kinds tracked per protocol (matches enum Flag).
inline constexpr int kNumFlags = 6;

int flag_index(Flag f);

struct ProtocolSummary {
  std::string label;
  Protocol kind = Protocol::Sat;
  double mse = 0.0;         // m^2
  double bias = 0.0;        // m
  double variance = 0.0;    // m^2 (mse - bias^2)
  double stderr_mse = 0.0;  // m^2, standard error of the mse estimate
  std::array<std::uint64_t, kNumFlags> flag_counts{};  // realizations per flag
  std::uint64_t n_corrections = 0;  // realizations with any repair flag
  std::uint64_t n_cointoss = 0;
};

struct SweepSummary {
  double sweep_value = 0.0;  // m or m/s
  double d_true = 0.0;       // m
  std::vector<ProtocolSummary> per_protocol;
  std::optional<double> crlb_m1;    // single sample at the SA-T time, m^2
  std::optional<double> crlb_full;  // all simulated sample times, m^2
};

// Worker cap: MCDIST_THREADS when set, hardware concurrency otherwise.
int worker_count();

// Runs task(0..n_tasks-1) on up to worker_count() threads. Tasks must write
// to disjoint slots; completion order is unspecified.
void parallel_for(int n_tasks, const std::function<void(int)>& task);

// Runs the full sweep. Deterministic for a fixed config, independent of the
// number of worker threads.
std::vector<SweepSummary> run_experiment(const ExperimentConfig& cfg);

struct CrlbPoint {
  double d = 0.0;  // m
  double t = 0.0;  // s
  std::optional<double> value;  // m^2, single-sample bound
};

// Single-sample bound over the (d, t) grid, row-major in d then t.
std::vector<CrlbPoint> crlb_curve(const EnvironmentParams& env,
                                  const std::vector<double>& distances,
                                  const std::vector<double>& times);

}  // namespace mcdist
