#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcdist/config.hpp"
#include "mcdist/harness.hpp"

// Plot-ready CSV emission. Numeric fields use shortest round-trip formatting,
// so reruns of the same config are byte-identical.

namespace mcdist {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// "d_um,t_ms,crlb_um2"; unbounded entries are written as inf.
std::string crlb_curve_csv(const std::vector<CrlbPoint>& points);

// "sweep_value,protocol,mse_um2,bias_um,var_um2,stderr_um2,n_corrections,n_cointoss"
std::string mse_sweep_csv(const std::vector<SweepSummary>& summaries, SweepKind kind);

// "sweep_value,crlb_m1_um2,crlb_full_um2"
std::string crlb_summary_csv(const std::vector<SweepSummary>& summaries, SweepKind kind);

// Provenance record written next to every output set.
struct RunManifest {
  std::string config_digest;
  std::string toolkit_version;
  std::string timestamp;  // ISO 8601 UTC
  std::uint64_t seed = 0;

  std::string to_text() const;
};

RunManifest make_manifest(const ParsedConfig& config, std::uint64_t seed);

void write_file(const std::string& path, const std::string& contents);

}  // namespace mcdist
