#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "srisk/estimator.hpp"
#include "srisk/loss.hpp"
#include "srisk/models.hpp"
#include "srisk/optimizer.hpp"

namespace srisk {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// skipped; keys are unique. Every accessor reports failures as ConfigError
/// carrying the line of the offending key.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  /// Line number of `key`, 0 if absent.
  std::size_t line(std::string_view key) const;
  const std::string& raw(std::string_view key) const;

  double get_double(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;
  std::size_t get_size(std::string_view key) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  /// Unsigned 64-bit integer, zero allowed (master seeds).
  std::uint64_t get_seed(std::string_view key = "seed") const;
  std::vector<double> get_list(std::string_view key) const;
  std::vector<std::size_t> get_size_list(std::string_view key) const;

  LossFunction get_loss(std::string_view key = "loss") const;
  /// `gaussian(mu=.., sigma=..)`.
  GaussianSource get_source(std::string_view key = "source") const;
  /// Keys d, mu, sigma (row-major list or diag(...)) and box (lo:hi pairs,
  /// a single pair is broadcast).
  PortfolioModel get_portfolio() const;
  DeltaSchedule get_schedule(std::string_view key = "schedule") const;
  /// `linear` or `constant(m)`.
  BatchSchedule get_batch(std::string_view key = "batch") const;

  /// Throws ConfigError naming the first key not in `allowed`.
  void check_known(std::initializer_list<std::string_view> allowed) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  const Entry& entry(std::string_view key) const;
  template <class F>
  auto with_line(std::string_view key, F&& f) const -> decltype(f(std::declval<const std::string&>()));

  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace srisk
