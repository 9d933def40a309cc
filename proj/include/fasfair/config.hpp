#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fasfair/model.hpp"

namespace fasfair {

// Malformed or invalid configuration input. The CLI maps this family to
// exit code 2, distinct from numerical failures (exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` scenario description. Defaults describe the baseline
// two-user downlink used across the test suite: 4-port apertures of size 5
// wavelengths at both users, 400 m / 600 m link distances, cubic path loss,
// 5 dBm transmit power, and 1 bps/Hz target rates for both users.
struct ScenarioConfig {
  SystemParams params;
  int n_c = 4;
  int n_e = 4;
  double w_c = 5.0;
  double w_e = 5.0;

  Scenario scenario() const { return make_scenario(params, n_c, w_c, n_e, w_e); }

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.params.p_dbm == b.params.p_dbm && a.params.noise_dbm == b.params.noise_dbm &&
           a.params.d_c == b.params.d_c && a.params.d_e == b.params.d_e &&
           a.params.theta == b.params.theta && a.params.r1 == b.params.r1 &&
           a.params.r2 == b.params.r2 && a.n_c == b.n_c && a.n_e == b.n_e &&
           a.w_c == b.w_c && a.w_e == b.w_e;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

inline double parse_real_value(std::string_view text, int line, std::string_view key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    config_fail(line, "value for '" + std::string(key) + "' is not a number");
  if (!std::isfinite(v))
    config_fail(line, "value for '" + std::string(key) + "' must be finite");
  return v;
}

inline int parse_port_count(std::string_view text, int line, std::string_view key) {
  double v = parse_real_value(text, line, key);
  if (v != std::floor(v) || v < 1.0 || v > 1e9)
    config_fail(line, "'" + std::string(key) + "' must be a positive integer");
  return static_cast<int>(v);
}

// Shortest decimal form that parses back to the same double, so that
// parse(render(cfg)) reproduces cfg bit for bit.
inline std::string render_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

inline ScenarioConfig parse_config_text(std::string_view text) {
  ScenarioConfig cfg;
  bool seen[11] = {};
  constexpr std::string_view kKeys[11] = {"p_dbm", "noise_dbm", "d_c", "d_e",
                                          "theta", "r1",        "r2",  "n_c",
                                          "n_e",   "w_c",       "w_e"};

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) detail::config_fail(line_no, "expected 'key = value'");
    if (line.find('=', eq + 1) != std::string_view::npos)
      detail::config_fail(line_no, "expected a single '=' per line");
    std::string_view key = detail::trim(line.substr(0, eq));
    std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) detail::config_fail(line_no, "missing key before '='");
    if (value.empty())
      detail::config_fail(line_no, "missing value for '" + std::string(key) + "'");

    int idx = -1;
    for (int i = 0; i < 11; ++i)
      if (key == kKeys[i]) idx = i;
    if (idx < 0) detail::config_fail(line_no, "unknown key '" + std::string(key) + "'");
    if (seen[idx]) detail::config_fail(line_no, "duplicate key '" + std::string(key) + "'");
    seen[idx] = true;

    switch (idx) {
      case 0: cfg.params.p_dbm = detail::parse_real_value(value, line_no, key); break;
      case 1: cfg.params.noise_dbm = detail::parse_real_value(value, line_no, key); break;
      case 2: cfg.params.d_c = detail::parse_real_value(value, line_no, key); break;
      case 3: cfg.params.d_e = detail::parse_real_value(value, line_no, key); break;
      case 4: cfg.params.theta = detail::parse_real_value(value, line_no, key); break;
      case 5: cfg.params.r1 = detail::parse_real_value(value, line_no, key); break;
      case 6: cfg.params.r2 = detail::parse_real_value(value, line_no, key); break;
      case 7: cfg.n_c = detail::parse_port_count(value, line_no, key); break;
      case 8: cfg.n_e = detail::parse_port_count(value, line_no, key); break;
      case 9: cfg.w_c = detail::parse_real_value(value, line_no, key); break;
      case 10: cfg.w_e = detail::parse_real_value(value, line_no, key); break;
    }
  }

  try {
    cfg.params.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());  // message names the offending key
  }
  if (!(cfg.w_c > 0.0)) throw ConfigError("w_c must be positive");
  if (!(cfg.w_e > 0.0)) throw ConfigError("w_e must be positive");
  return cfg;
}

inline ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string render_config(const ScenarioConfig& cfg) {
  std::string out;
  auto emit = [&out](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  emit("p_dbm", detail::render_real(cfg.params.p_dbm));
  emit("noise_dbm", detail::render_real(cfg.params.noise_dbm));
  emit("d_c", detail::render_real(cfg.params.d_c));
  emit("d_e", detail::render_real(cfg.params.d_e));
  emit("theta", detail::render_real(cfg.params.theta));
  emit("r1", detail::render_real(cfg.params.r1));
  emit("r2", detail::render_real(cfg.params.r2));
  emit("n_c", std::to_string(cfg.n_c));
  emit("n_e", std::to_string(cfg.n_e));
  emit("w_c", detail::render_real(cfg.w_c));
  emit("w_e", detail::render_real(cfg.w_e));
  return out;
}

}  // namespace fasfair
