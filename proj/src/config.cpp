#include "cvp/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cvp/errors.hpp"

namespace cvp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const std::string s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ValidationError("bad number for " + std::string(key) + ": '" + s + "'");
  }
  return out;
}

long long parse_integer(std::string_view key, std::string_view v) {
  long long out = 0;
  const std::string s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ValidationError("bad integer for " + std::string(key) + ": '" + s + "'");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  const long long x = parse_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ValidationError("value out of range for " + std::string(key));
  return static_cast<int>(x);
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError("bad boolean for " + std::string(key) + ": '" + s + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  const std::string s = trim(text);
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(parse_int("radii", std::string_view(s).substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "alpha",      "belt_literal",   "belt_radius", "check_stride", "eps",          "gamma",
      "inner_budget", "kkt_tol",      "lambda",      "linearization", "max_inner",   "max_outer",
      "mu",         "omega",          "radii",       "seed",          "sigma",       "tau",
      "theta",      "violation_tol",  "warm_multipliers",
  };
  return k;
}

void RunConfig::set(std::string_view key_in, std::string_view value) {
  std::string key = trim(key_in);
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  if (key == "lambda") {
    outer.lambda = parse_double(key, value);
  } else if (key == "sigma") {
    outer.sigma = parse_double(key, value);
  } else if (key == "theta") {
    outer.theta = parse_double(key, value);
  } else if (key == "belt_radius") {
    outer.belt_radius = parse_int(key, value);
  } else if (key == "omega") {
    outer.omega = parse_double(key, value);
  } else if (key == "eps") {
    outer.eps = parse_double(key, value);
  } else if (key == "check_stride") {
    outer.check_stride = parse_int(key, value);
  } else if (key == "max_outer") {
    outer.max_outer = parse_int(key, value);
  } else if (key == "inner_budget") {
    outer.inner_budget = parse_int(key, value);
  } else if (key == "radii") {
    outer.radii_override = parse_int_list(value);
  } else if (key == "belt_literal") {
    outer.belt_literal = parse_bool(key, value);
  } else if (key == "violation_tol") {
    outer.violation_tol = parse_double(key, value);
  } else if (key == "linearization") {
    const std::string v = trim(value);
    if (v == "taylor") {
      outer.linearization = LinearizationForm::kTaylor;
    } else if (v == "doubled") {
      outer.linearization = LinearizationForm::kDoubled;
    } else {
      throw ValidationError("linearization must be taylor or doubled");
    }
  } else if (key == "mu") {
    admm.mu = parse_double(key, value);
  } else if (key == "tau") {
    admm.tau = parse_double(key, value);
  } else if (key == "alpha") {
    const std::string v = trim(value);
    if (v == "paper") {
      admm.alpha_mode = AlphaMode::kFixed;
    } else if (v == "safe") {
      admm.alpha_mode = AlphaMode::kSafe;
    } else {
      throw ValidationError("alpha must be paper or safe");
    }
  } else if (key == "max_inner") {
    admm.max_iterations = parse_int(key, value);
  } else if (key == "kkt_tol") {
    admm.kkt_tol = parse_double(key, value);
  } else if (key == "warm_multipliers") {
    admm.warm_multipliers = parse_bool(key, value);
  } else if (key == "gamma") {
    gamma = parse_double(key, value);
  } else if (key == "seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw ValidationError("seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  try {
    outer.validate();
    admm.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("gamma must be >= 0");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["alpha"] = admm.alpha_mode == AlphaMode::kFixed ? "paper" : "safe";
  m["belt_literal"] = outer.belt_literal ? "true" : "false";
  m["belt_radius"] = std::to_string(outer.belt_radius);
  m["check_stride"] = std::to_string(outer.check_stride);
  m["eps"] = fmt(outer.eps);
  m["gamma"] = fmt(gamma);
  m["inner_budget"] = std::to_string(outer.inner_budget);
  m["kkt_tol"] = fmt(admm.kkt_tol);
  m["lambda"] = fmt(outer.lambda);
  m["linearization"] = outer.linearization == LinearizationForm::kDoubled ? "doubled" : "taylor";
  m["max_inner"] = std::to_string(admm.max_iterations);
  m["max_outer"] = std::to_string(outer.max_outer);
  m["mu"] = fmt(admm.mu);
  m["omega"] = fmt(outer.omega);
  m["radii"] = join(outer.radii_override);
  m["seed"] = std::to_string(seed);
  m["sigma"] = fmt(outer.sigma);
  m["tau"] = fmt(admm.tau);
  m["theta"] = fmt(outer.theta);
  m["violation_tol"] = fmt(outer.violation_tol);
  m["warm_multipliers"] = admm.warm_multipliers ? "true" : "false";
  return m;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(n) + " has no '='");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(n) + " has an empty key");
    if (!seen.insert(key).second) throw ValidationError("duplicate config key '" + key + "'");
    out.emplace_back(std::move(key), value);
  }
  return out;
}

RunConfig load_config(std::string_view file_text, const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  for (const auto& [k, v] : parse_config_text(file_text)) cfg.set(k, v);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

}  // namespace cvp
