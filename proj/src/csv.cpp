#include "mcdist/csv.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mcdist/units.hpp"
#include "mcdist/version.hpp"

namespace mcdist {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string crlb_curve_csv(const std::vector<CrlbPoint>& points) {
  std::string out = "d_um,t_ms,crlb_um2\n";
  for (const auto& p : points) {
    out += format_double(units::m_to_um(p.d));
    out += ',';
    out += format_double(units::s_to_ms(p.t));
    out += ',';
    out += p.value ? format_double(units::m2_to_um2(*p.value)) : "inf";
    out += '\n';
  }
  return out;
}

namespace {

std::string sweep_value_text(double value, SweepKind kind) {
  return format_double(kind == SweepKind::Distance ? units::m_to_um(value)
                                                   : units::m_s_to_mm_s(value));
}

}  // namespace

std::string mse_sweep_csv(const std::vector<SweepSummary>& summaries, SweepKind kind) {
  std::string out =
      "sweep_value,protocol,mse_um2,bias_um,var_um2,stderr_um2,n_corrections,n_cointoss\n";
  for (const auto& s : summaries) {
    for (const auto& p : s.per_protocol) {
      out += sweep_value_text(s.sweep_value, kind);
      out += ',';
      out += p.label;
      out += ',';
      out += format_double(units::m2_to_um2(p.mse));
      out += ',';
      out += format_double(units::m_to_um(p.bias));
      out += ',';
      out += format_double(units::m2_to_um2(p.variance));
      out += ',';
      out += format_double(units::m2_to_um2(p.stderr_mse));
      out += ',';
      out += std::to_string(p.n_corrections);
      out += ',';
      out += std::to_string(p.n_cointoss);
      out += '\n';
    }
  }
  return out;
}

std::string crlb_summary_csv(const std::vector<SweepSummary>& summaries, SweepKind kind) {
  std::string out = "sweep_value,crlb_m1_um2,crlb_full_um2\n";
  for (const auto& s : summaries) {
    out += sweep_value_text(s.sweep_value, kind);
    out += ',';
    out += s.crlb_m1 ? format_double(units::m2_to_um2(*s.crlb_m1)) : "inf";
    out += ',';
    out += s.crlb_full ? format_double(units::m2_to_um2(*s.crlb_full)) : "inf";
    out += '\n';
  }
  return out;
}

std::string RunManifest::to_text() const {
  std::string out;
  out += "config_digest = " + config_digest + '\n';
  out += "toolkit_version = " + toolkit_version + '\n';
  out += "timestamp = " + timestamp + '\n';
  out += "seed = " + std::to_string(seed) + '\n';
  return out;
}

RunManifest make_manifest(const ParsedConfig& config, std::uint64_t seed) {
  RunManifest m;
  m.config_digest = config.digest();
  m.toolkit_version = kVersion;
  m.seed = seed;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  m.timestamp = buf;
  return m;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << contents;
}

}  // namespace mcdist
