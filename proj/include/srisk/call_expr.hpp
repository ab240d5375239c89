#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace srisk {

/// A parsed `name(key=value, ...)` expression as used for losses and sources.
struct CallExpr {
  std::string name;
  std::vector<std::pair<std::string, double>> args;

  /// Value of `key`, or `fallback` when absent.
  double get(std::string_view key, double fallback) const;
  /// Value of `key`; throws ConfigError when absent.
  double require(std::string_view key) const;
  /// Throws ConfigError if any argument key is not in `allowed`.
  void check_keys(std::initializer_list<std::string_view> allowed) const;
};

/// Parses `name(k=v, ...)`. Whitespace is ignored around tokens; values are
/// decimal literals. Throws ConfigError (line 0) on malformed text.
CallExpr parse_call(std::string_view text);

/// Parses a decimal literal, rejecting trailing garbage.
double parse_decimal(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace srisk
