#include "mcdist/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mcdist/units.hpp"

namespace mcdist {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const ConfigEntry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(e.line, "expected a number for '" + e.key + "', got '" + e.value + "'");
  }
}

long parse_long(const ConfigEntry& e) {
  try {
    std::size_t used = 0;
    const long v = std::stol(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(e.line, "expected an integer for '" + e.key + "', got '" + e.value + "'");
  }
}

std::vector<double> parse_list(const ConfigEntry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(e.line, "empty element in list for '" + e.key + "'");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail(e.line, "bad list element '" + item + "' for '" + e.key + "'");
    }
  }
  if (out.empty()) fail(e.line, "empty list for '" + e.key + "'");
  return out;
}

// "key=value key=value ..." payload of a protocol line.
std::vector<std::pair<std::string, std::string>> parse_pairs(const ConfigEntry& e) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::stringstream ss(e.value);
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= token.size())
      fail(e.line, "expected key=value tokens, got '" + token + "'");
    pairs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return pairs;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    if (section.empty()) fail(line_no, "entry before any [section] header");
    ConfigEntry entry;
    entry.section = section;
    entry.key = trim(line.substr(0, eq));
    entry.value = trim(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) fail(line_no, "empty key");
    cfg.entries.push_back(std::move(entry));
  }
  return cfg;
}

ParsedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string ParsedConfig::digest() const {
  std::vector<ConfigEntry> sorted = entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.section != b.section) return a.section < b.section;
    return a.key < b.key;
  });
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
  };
  for (const auto& e : sorted) {
    feed(e.section);
    feed(e.key);
    feed(e.value);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig make_experiment_config(const ParsedConfig& raw) {
  ExperimentConfig cfg;
  cfg.sim.mode = SimMode::PoissonAnalytic;
  bool saw_sweep_kind = false;

  for (const auto& e : raw.entries) {
    if (e.section == "environment") {
      if (e.key == "d_um") cfg.base_env.d = units::um_to_m(parse_double(e));
      else if (e.key == "v_par_mm_s") cfg.base_env.v_par = units::mm_s_to_m_s(parse_double(e));
      else if (e.key == "v_perp_mm_s") cfg.base_env.v_perp = units::mm_s_to_m_s(parse_double(e));
      else if (e.key == "diff_um2_ms") cfg.base_env.diff_coeff = units::um2_ms_to_m2_s(parse_double(e));
      else if (e.key == "k_per_s") cfg.base_env.k_degrade = parse_double(e);
      else if (e.key == "n_emitted") cfg.base_env.n_emitted = static_cast<double>(parse_long(e));
      else if (e.key == "r_rx_um") cfg.base_env.r_rx = units::um_to_m(parse_double(e));
      else fail(e.line, "unknown environment key '" + e.key + "'");
    } else if (e.section == "simulation") {
      if (e.key == "dt_ms") cfg.sim.dt = units::ms_to_s(parse_double(e));
      else if (e.key == "n_steps") cfg.sim.n_steps = static_cast<int>(parse_long(e));
      else if (e.key == "seed") cfg.sim.seed = static_cast<std::uint64_t>(parse_long(e));
      else if (e.key == "n_realizations") cfg.n_realizations = static_cast<int>(parse_long(e));
      else if (e.key == "mode") {
        if (e.value == "particle") cfg.sim.mode = SimMode::Particle;
        else if (e.value == "poisson") cfg.sim.mode = SimMode::PoissonAnalytic;
        else fail(e.line, "mode must be 'particle' or 'poisson'");
      } else fail(e.line, "unknown simulation key '" + e.key + "'");
    } else if (e.section == "sweep") {
      if (e.key == "kind") {
        if (e.value == "distance") cfg.sweep = SweepKind::Distance;
        else if (e.value == "flow") cfg.sweep = SweepKind::FlowParallel;
        else fail(e.line, "sweep kind must be 'distance' or 'flow'");
        saw_sweep_kind = true;
      } else if (e.key == "values") {
        cfg.sweep_values = parse_list(e);
      } else fail(e.line, "unknown sweep key '" + e.key + "'");
    } else if (e.section == "protocols") {
      ProtocolSpec spec;
      if (e.key == "sat") spec.kind = Protocol::Sat;
      else if (e.key == "rtt") spec.kind = Protocol::Rtt;
      else if (e.key == "envd") spec.kind = Protocol::Envd;
      else if (e.key == "ml") spec.kind = Protocol::Ml;
      else fail(e.line, "unknown protocol '" + e.key + "'");
      for (const auto& [k, v] : parse_pairs(e)) {
        ConfigEntry sub{e.section, k, v, e.line};
        if (spec.kind == Protocol::Sat && k == "t_sa_ms") spec.t_sa = units::ms_to_s(parse_double(sub));
        else if (spec.kind == Protocol::Rtt && k == "tau") spec.tau = parse_double(sub);
        else if (spec.kind == Protocol::Envd && k == "window") spec.window = static_cast<int>(parse_long(sub));
        else if ((spec.kind == Protocol::Ml || spec.kind == Protocol::Envd) && k == "d_min_um")
          spec.ml.d_min = units::um_to_m(parse_double(sub));
        else if ((spec.kind == Protocol::Ml || spec.kind == Protocol::Envd) && k == "d_max_um")
          spec.ml.d_max = units::um_to_m(parse_double(sub));
        else if (spec.kind == Protocol::Ml && k == "n_grid")
          spec.ml.n_grid = static_cast<int>(parse_long(sub));
        else if (spec.kind == Protocol::Ml && k == "refine")
          spec.ml.refine = parse_long(sub) != 0;
        else fail(e.line, "unknown option '" + k + "' for protocol '" + e.key + "'");
      }
      cfg.protocols.push_back(spec);
    } else {
      fail(e.line, "unknown section '" + e.section + "'");
    }
  }

  if (!saw_sweep_kind) throw ConfigError("config: missing [sweep] kind");
  if (cfg.sweep_values.empty()) throw ConfigError("config: missing [sweep] values");

  // Sweep values arrive in file units: um for distance, mm/s for flow.
  for (double& v : cfg.sweep_values)
    v = (cfg.sweep == SweepKind::Distance) ? units::um_to_m(v) : units::mm_s_to_m_s(v);

  try {
    cfg.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  return cfg;
}

}  // namespace mcdist
