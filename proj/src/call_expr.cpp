#include "srisk/call_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "srisk/error.hpp"

namespace srisk {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_decimal(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(0, "expected a decimal literal, got '" + std::string(text) + "'");
  }
  return value;
}

double CallExpr::get(std::string_view key, double fallback) const {
  const auto it = std::find_if(args.begin(), args.end(), [&](const auto& kv) { return kv.first == key; });
  return it == args.end() ? fallback : it->second;
}

double CallExpr::require(std::string_view key) const {
  const auto it = std::find_if(args.begin(), args.end(), [&](const auto& kv) { return kv.first == key; });
  if (it == args.end()) {
    throw ConfigError(0, name + "(...) is missing required argument '" + std::string(key) + "'");
  }
  return it->second;
}

void CallExpr::check_keys(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : args) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(0, name + "(...) has unknown argument '" + key + "'");
    }
  }
}

CallExpr parse_call(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ConfigError(0, "expected 'name(key=value, ...)', got '" + std::string(text) + "'");
  }
  CallExpr expr;
  expr.name = std::string(trim(text.substr(0, open)));
  if (expr.name.empty()) throw ConfigError(0, "missing family name in '" + std::string(text) + "'");

  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (trim(body).empty()) return expr;
  while (true) {
    const auto comma = body.find(',');
    const std::string_view item = trim(body.substr(0, comma));
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(0, "expected key=value, got '" + std::string(item) + "'");
    }
    std::string key(trim(item.substr(0, eq)));
    if (key.empty()) throw ConfigError(0, "empty key in '" + std::string(item) + "'");
    for (const auto& kv : expr.args) {
      if (kv.first == key) throw ConfigError(0, "duplicate argument '" + key + "'");
    }
    expr.args.emplace_back(std::move(key), parse_decimal(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return expr;
}

}  // namespace srisk
