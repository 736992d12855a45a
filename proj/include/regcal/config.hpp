#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "regcal/experiments.hpp"

namespace regcal {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Serializes to the flat `key = value` format
/// read by parse_config.
struct RunConfig {
  experiments::ScenarioConfig scenario;
  /// Empty means every registered scenario.
  std::vector<std::string> scenarios;
  std::string out = "regcal-out";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_unsigned_v<T>) {
    if (!text.empty() && text.front() == '-') {
      throw config_error("key '" + std::string(key) + "': expected a nonnegative integer, got '" +
                         std::string(text) + "'");
    }
  }
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    const char* kind = std::is_integral_v<T> ? "an integer" : "a number";
    throw config_error("key '" + std::string(key) + "': expected " + kind + ", got '" +
                       std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += xs[i];
  }
  return s;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "seed",           "horizon",       "grid_n",       "ensemble",
      "eps_ladder",     "scenarios",     "out",          "quadrature",
      "relative_threshold", "lattice_pitch", "cantor_depth", "curve_members",
      "curve_points"};
  return keys;
}

}  // namespace detail

inline EpsLadder parse_ladder(std::string_view text) {
  EpsLadder l;
  for (const auto& piece : detail::split_list(text)) {
    l.multiples.push_back(detail::parse_number<std::size_t>("eps_ladder", piece));
  }
  return l;
}

inline Quadrature parse_quadrature(std::string_view text) {
  if (text == "grid") return Quadrature::grid;
  if (text == "jittered") return Quadrature::jittered;
  throw config_error("key 'quadrature': expected grid or jittered, got '" + std::string(text) +
                     "'");
}

/// Checks the cross-field preconditions; throws config_error.
inline void validate(const RunConfig& c) {
  const auto& s = c.scenario;
  if (s.steps < 2) {
    throw config_error("grid_n must be at least 2, got " + std::to_string(s.steps));
  }
  if (!(s.horizon > 0.0)) throw config_error("horizon must be positive");
  if (s.members == 0) throw config_error("ensemble must be at least 1");
  try {
    s.ladder.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("eps_ladder: ") + e.what());
  }
  if (s.ladder.multiples.front() > s.steps) {
    throw config_error("eps_ladder entries cannot exceed grid_n");
  }
  if (!(s.relative_threshold > 0.0)) throw config_error("relative_threshold must be positive");
  if (!(s.lattice_pitch > 0.0)) throw config_error("lattice_pitch must be positive");
  if (s.cantor_depth < 1 || s.cantor_depth > 30) {
    throw config_error("cantor_depth must lie in [1,30]");
  }
  if (s.curve_points < 2) throw config_error("curve_points must be at least 2");
  for (const auto& id : c.scenarios) {
    try {
      experiments::find_scenario(id);
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
}

/// Parses the flat `key = value` format; `#` starts a comment. `seed` is
/// required, everything else has a default. Threshold overrides use keys
/// `threshold.<scenario>.<metric>`.
inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, std::string> values;
  std::vector<std::string> unknown;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = detail::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(v.substr(0, eq)));
    const std::string value(detail::trim(v.substr(eq + 1)));
    if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
    if (values.count(key)) throw config_error("duplicate key '" + key + "'");
    values.emplace(key, value);
    if (!detail::known_keys().count(key) && key.rfind("threshold.", 0) != 0) {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) throw config_error("unknown keys: " + detail::join(unknown, ", "));
  if (!values.count("seed")) throw config_error("missing required key 'seed'");

  auto& s = c.scenario;
  for (const auto& [key, value] : values) {
    if (key == "seed") {
      s.seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "horizon") {
      s.horizon = detail::parse_number<double>(key, value);
    } else if (key == "grid_n") {
      s.steps = detail::parse_number<std::size_t>(key, value);
    } else if (key == "ensemble") {
      s.members = detail::parse_number<std::size_t>(key, value);
    } else if (key == "eps_ladder") {
      s.ladder = parse_ladder(value);
    } else if (key == "scenarios") {
      c.scenarios = value == "all" ? std::vector<std::string>{} : detail::split_list(value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "quadrature") {
      s.quadrature = parse_quadrature(value);
    } else if (key == "relative_threshold") {
      s.relative_threshold = detail::parse_number<double>(key, value);
    } else if (key == "lattice_pitch") {
      s.lattice_pitch = detail::parse_number<double>(key, value);
    } else if (key == "cantor_depth") {
      s.cantor_depth = detail::parse_number<int>(key, value);
    } else if (key == "curve_members") {
      s.curve_members = detail::parse_number<std::size_t>(key, value);
    } else if (key == "curve_points") {
      s.curve_points = detail::parse_number<std::size_t>(key, value);
    } else {
      const std::string name = key.substr(std::string_view("threshold.").size());
      if (name.find('.') == std::string::npos) {
        throw config_error("threshold override '" + key +
                           "' must look like threshold.<scenario>.<metric>");
      }
      s.thresholds[name] = detail::parse_number<double>(key, value);
    }
  }
  validate(c);
  return c;
}

/// Inverse of parse_config: every field, shortest round-trip number format.
/// Without `include_out` the text does not depend on where a run is written.
inline std::string to_config_text(const RunConfig& c, bool include_out = true) {
  using experiments::detail::format_double;
  const auto& s = c.scenario;
  std::ostringstream o;
  o << "seed = " << s.seed << '\n'
    << "horizon = " << format_double(s.horizon) << '\n'
    << "grid_n = " << s.steps << '\n'
    << "ensemble = " << s.members << '\n'
    << "eps_ladder = " << experiments::detail::ladder_text(s.ladder) << '\n'
    << "scenarios = " << (c.scenarios.empty() ? "all" : detail::join(c.scenarios, ",")) << '\n'
    << (include_out ? "out = " + c.out + "\n" : std::string())
    << "quadrature = " << (s.quadrature == Quadrature::grid ? "grid" : "jittered") << '\n'
    << "relative_threshold = " << format_double(s.relative_threshold) << '\n'
    << "lattice_pitch = " << format_double(s.lattice_pitch) << '\n'
    << "cantor_depth = " << s.cantor_depth << '\n'
    << "curve_members = " << s.curve_members << '\n'
    << "curve_points = " << s.curve_points << '\n';
  for (const auto& [k, v] : s.thresholds) o << "threshold." << k << " = " << format_double(v) << '\n';
  return o.str();
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& x = a.scenario;
  const auto& y = b.scenario;
  return x.seed == y.seed && x.horizon == y.horizon && x.steps == y.steps &&
         x.ladder == y.ladder && x.members == y.members && x.quadrature == y.quadrature &&
         x.relative_threshold == y.relative_threshold && x.lattice_pitch == y.lattice_pitch &&
         x.cantor_depth == y.cantor_depth && x.curve_members == y.curve_members &&
         x.curve_points == y.curve_points && x.thresholds == y.thresholds &&
         a.scenarios == b.scenarios && a.out == b.out;
}

}  // namespace regcal
