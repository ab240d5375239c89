// Command-line harness for the estimation, rate, gradient and optimization studies.
//
//   srisk <estimate|rate-check|grad-check|optimize> --config <path> --out <dir> --seed <int> [--reps <int>]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "srisk/config.hpp"
#include "srisk/error.hpp"
#include "srisk/studies.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

int run(const srisk::RunSpec& spec) {
  using srisk::Command;
  switch (spec.command) {
    case Command::Estimate: {
      for (const auto& row : srisk::run_estimate_study(spec)) {
        fmt::print("m={:<7} mean_err={:+.6f} mse={:.6e} mse*m={:.4f} iqr=[{:+.5f}, {:+.5f}]\n", row.m,
                   row.mean_err, row.mse, row.mse_times_m, row.q25, row.q75);
      }
      break;
    }
    case Command::RateCheck: {
      const auto report = srisk::run_rate_check(spec);
      for (std::size_t i = 0; i < report.m.size(); ++i) {
        fmt::print("m={:<7} mse={:.6e}\n", report.m[i], report.mse[i]);
      }
      fmt::print("slope={:.4f} intercept={:.4f} implied_constant={:.4g} theoretical_constant={:.4g}\n",
                 report.fit.slope, report.fit.intercept, report.implied_constant, report.theoretical_constant);
      break;
    }
    case Command::GradCheck: {
      const auto report = srisk::run_grad_check(spec);
      for (const auto& r : report.rows) {
        fmt::print("theta_id={} m={:<7} mse={:.6e} mean_sq_norm={:.6e} bias={:.3e}\n", r.theta_id, r.m, r.mse,
                   r.mean_sq_norm, r.bias_l2);
      }
      for (std::size_t id = 0; id < report.fits.size(); ++id) {
        fmt::print("theta_id={} slope={:.4f}\n", id, report.fits[id].slope);
      }
      break;
    }
    case Command::Optimize: {
      const auto report = srisk::run_optimize_study(spec);
      fmt::print("c={:.6g} seeds={}\n", report.c, report.traces.size());
      if (!report.envelope.empty()) {
        const auto& last = report.envelope.back();
        fmt::print("k={} median_dist_sq={:.6e} median_h_gap={:.6e}\n", last.k, last.median_dist_sq,
                   last.median_h_gap);
      }
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility-based shortfall risk estimation and optimization studies"};
  app.require_subcommand(1);

  srisk::RunSpec spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;

  const std::pair<const char*, srisk::Command> commands[] = {
      {"estimate", srisk::Command::Estimate},
      {"rate-check", srisk::Command::RateCheck},
      {"grad-check", srisk::Command::GradCheck},
      {"optimize", srisk::Command::Optimize},
  };
  for (const auto& [name, command] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", spec.config_path, "Config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", spec.out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Master seed (defaults to the config's seed key, then 0)");
    sub->add_option("--reps", reps, "Replications (seeds for optimize)");
    sub->callback([&spec, cmd = command] { spec.command = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (!seed) {
      const auto cfg = srisk::Config::load(spec.config_path);
      seed = cfg.has("seed") ? cfg.get_seed() : 0;
    }
    spec.seed = *seed;
    spec.reps = reps;
    return run(spec);
  } catch (const srisk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const srisk::Error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  }
}
