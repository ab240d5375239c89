#include "srisk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "srisk/call_expr.hpp"
#include "srisk/error.hpp"

namespace srisk {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find(sep);
    parts.push_back(trim(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

std::size_t to_size(double v) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
    throw ConfigError(0, fmt::format("expected a positive integer, got {}", v));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(number, "expected 'key = value'");
    std::string key(trim(view.substr(0, eq)));
    if (key.empty()) throw ConfigError(number, "empty key");
    const std::string_view value = trim(view.substr(eq + 1));
    if (value.empty()) throw ConfigError(number, "empty value for '" + key + "'");
    if (cfg.entries_.count(key)) throw ConfigError(number, "duplicate key '" + key + "'");
    cfg.entries_.emplace(std::move(key), Entry{std::string(value), number});
  }
  return cfg;
}

Config Config::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file " + path.string());
  return parse(in);
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::size_t Config::line(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

const Config::Entry& Config::entry(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(0, "missing required key '" + std::string(key) + "'");
  return it->second;
}

const std::string& Config::raw(std::string_view key) const { return entry(key).value; }

template <class F>
auto Config::with_line(std::string_view key, F&& f) const -> decltype(f(std::declval<const std::string&>())) {
  const Entry& e = entry(key);
  try {
    return f(e.value);
  } catch (const ConfigError& err) {
    if (err.line() != 0) throw;
    throw ConfigError(e.line, std::string(key) + ": " + err.detail());
  } catch (const Error& err) {
    throw ConfigError(e.line, std::string(key) + ": " + err.what());
  }
}

double Config::get_double(std::string_view key) const {
  return with_line(key, [](const std::string& v) { return parse_decimal(v); });
}

double Config::get_double(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t Config::get_size(std::string_view key) const {
  return with_line(key, [](const std::string& v) { return to_size(parse_decimal(v)); });
}

std::size_t Config::get_size(std::string_view key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

std::uint64_t Config::get_seed(std::string_view key) const {
  return with_line(key, [](const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError(0, "expected an unsigned integer, got '" + v + "'");
    return out;
  });
}

std::vector<double> Config::get_list(std::string_view key) const {
  return with_line(key, [](const std::string& v) {
    std::vector<double> out;
    for (const auto part : split(v, ',')) out.push_back(parse_decimal(part));
    return out;
  });
}

std::vector<std::size_t> Config::get_size_list(std::string_view key) const {
  return with_line(key, [](const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto part : split(v, ',')) out.push_back(to_size(parse_decimal(part)));
    return out;
  });
}

LossFunction Config::get_loss(std::string_view key) const {
  return with_line(key, [](const std::string& v) { return parse_loss(v); });
}

GaussianSource Config::get_source(std::string_view key) const {
  return with_line(key, [](const std::string& v) {
    const CallExpr expr = parse_call(v);
    if (expr.name != "gaussian") throw ConfigError(0, "unknown source family '" + expr.name + "'");
    expr.check_keys({"mu", "sigma"});
    GaussianSource src{expr.get("mu", 0.0), expr.get("sigma", 1.0)};
    if (!(src.sigma > 0.0)) throw ConfigError(0, "gaussian source needs sigma > 0");
    return src;
  });
}

PortfolioModel Config::get_portfolio() const {
  const std::size_t d = get_size("d");
  const auto mu_list = get_list("mu");
  with_line("mu", [&](const std::string&) {
    if (mu_list.size() != d) throw ConfigError(0, fmt::format("expected {} entries, got {}", d, mu_list.size()));
    return 0;
  });
  const auto di = static_cast<Eigen::Index>(d);
  Vector mu = Eigen::Map<const Vector>(mu_list.data(), di);

  Matrix sigma = with_line("sigma", [&](const std::string& v) {
    Matrix s = Matrix::Zero(di, di);
    std::string_view text = trim(v);
    if (text.rfind("diag(", 0) == 0 && text.back() == ')') {
      const auto parts = split(text.substr(5, text.size() - 6), ',');
      if (parts.size() != d) throw ConfigError(0, fmt::format("diag needs {} entries, got {}", d, parts.size()));
      for (std::size_t i = 0; i < d; ++i) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = parse_decimal(parts[i]);
      return s;
    }
    const auto parts = split(text, ',');
    if (parts.size() != d * d) throw ConfigError(0, fmt::format("expected {} row-major entries, got {}", d * d, parts.size()));
    for (std::size_t i = 0; i < d * d; ++i) {
      s(static_cast<Eigen::Index>(i / d), static_cast<Eigen::Index>(i % d)) = parse_decimal(parts[i]);
    }
    return s;
  });

  Box box = with_line("box", [&](const std::string& v) {
    Box b;
    for (const auto part : split(v, ',')) {
      const auto colon = part.find(':');
      if (colon == std::string_view::npos) throw ConfigError(0, "expected lo:hi, got '" + std::string(part) + "'");
      b.push_back({parse_decimal(part.substr(0, colon)), parse_decimal(part.substr(colon + 1))});
    }
    if (b.size() == 1) b.assign(d, b.front());
    if (b.size() != d) throw ConfigError(0, fmt::format("expected {} intervals, got {}", d, b.size()));
    return b;
  });

  return with_line("sigma", [&](const std::string&) { return PortfolioModel(mu, sigma, box); });
}

DeltaSchedule Config::get_schedule(std::string_view key) const {
  if (!has(key)) return DeltaSchedule::InverseSqrt;
  return with_line(key, [](const std::string& v) {
    if (v == "inverse_sqrt") return DeltaSchedule::InverseSqrt;
    if (v == "inverse_quarter_power") return DeltaSchedule::InverseQuarterPower;
    throw ConfigError(0, "expected inverse_sqrt or inverse_quarter_power, got '" + v + "'");
  });
}

BatchSchedule Config::get_batch(std::string_view key) const {
  if (!has(key)) return BatchSchedule::linear();
  return with_line(key, [](const std::string& v) {
    if (v == "linear") return BatchSchedule::linear();
    const std::string_view text = v;
    if (text.rfind("constant(", 0) == 0 && text.back() == ')') {
      return BatchSchedule::constant(to_size(parse_decimal(text.substr(9, text.size() - 10))));
    }
    throw ConfigError(0, "expected linear or constant(m), got '" + v + "'");
  });
}

void Config::check_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, e] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(e.line, "unknown key '" + key + "'");
    }
  }
}

}  // namespace srisk
