#pragma once

// Run configuration shared by the CLI and the service. Files are flat
// `key = value` text; '#' starts a comment.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cvp/optimizer.hpp"

namespace cvp {

struct RunConfig {
  OuterParams outer;
  AdmmParams admm;
  double gamma = 10.0;
  std::uint64_t seed = 0;

  /// Sets one documented key. Throws ValidationError for an unknown key or a
  /// value that does not parse or is out of range.
  void set(std::string_view key, std::string_view value);
  /// Range checks on every field (delegates to the parameter structs).
  void validate() const;

  /// Every key with its current value, in the format `set` accepts.
  std::map<std::string, std::string> to_map() const;

  static const std::vector<std::string>& keys();
};

/// Parses `key = value` lines into (key, value) pairs, in order. Throws
/// ValidationError on a line without '=' and on duplicate keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

/// Applies a config file and then the overrides (flags win).
RunConfig load_config(std::string_view file_text, const std::vector<std::pair<std::string, std::string>>& overrides);

std::vector<int> parse_int_list(std::string_view text);

}  // namespace cvp
