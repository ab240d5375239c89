#include "srisk/studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "srisk/call_expr.hpp"
#include "srisk/error.hpp"
#include "srisk/parallel.hpp"
#include "srisk/rng.hpp"

namespace srisk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string(); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + path.string());
  return out;
}

void prepare_dir(const std::optional<std::filesystem::path>& dir) {
  if (dir) std::filesystem::create_directories(*dir);
}

std::optional<double> reference_ubsr(const EstimateStudyConfig& cfg) {
  try {
    return gaussian_ubsr_reference(cfg.source, cfg.loss, cfg.lambda);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidParameter) throw;
    return std::nullopt;
  }
}

template <class F>
void with_context(const std::string& context, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.detail());
  }
}

EstimatorConfig estimator_from(const Config& cfg) {
  EstimatorConfig est;
  est.d1 = cfg.get_double("d1", 1.0);
  est.schedule = cfg.get_schedule();
  est.max_doublings = static_cast<int>(cfg.get_size("max_doublings", 60));
  if (!(est.d1 > 0.0)) throw ConfigError(cfg.line("d1"), "d1 must be positive");
  return est;
}

double lambda_from(const Config& cfg) {
  const double lambda = cfg.get_double("lambda");
  if (!(lambda > 0.0)) throw ConfigError(cfg.line("lambda"), "lambda must be positive");
  return lambda;
}

template <class Cfg>
Cfg load_for(const RunSpec& spec) {
  Cfg cfg = Cfg::from(Config::load(spec.config_path));
  if (spec.reps) {
    if (*spec.reps == 0) throw ConfigError(0, "reps must be >= 1");
    if constexpr (requires { cfg.reps; }) cfg.reps = *spec.reps;
    if constexpr (requires { cfg.seeds; }) cfg.seeds = *spec.reps;
  }
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------- estimation

EstimateStudyConfig EstimateStudyConfig::from(const Config& cfg) {
  cfg.check_known({"source", "loss", "lambda", "m", "reps", "d1", "schedule", "max_doublings", "delta", "moment_t",
                   "domain_halfwidth", "seed"});
  EstimateStudyConfig out;
  out.source = cfg.has("source") ? cfg.get_source() : GaussianSource{};
  out.loss = cfg.get_loss();
  out.lambda = lambda_from(cfg);
  out.m_list = cfg.get_size_list("m");
  out.reps = cfg.get_size("reps", 1000);
  out.estimator = estimator_from(cfg);
  if (cfg.has("delta")) {
    out.fixed_delta = cfg.get_double("delta");
    if (!(*out.fixed_delta > 0.0)) throw ConfigError(cfg.line("delta"), "delta must be positive");
  }
  if (cfg.has("moment_t")) out.moment_t = cfg.get_double("moment_t");
  out.domain_halfwidth = cfg.get_double("domain_halfwidth", 10.0);
  return out;
}

std::vector<Replication> replicate_estimates(const EstimateStudyConfig& cfg, std::size_t m, std::uint64_t seed) {
  const std::optional<double> reference = reference_ubsr(cfg);
  EstimatorConfig est = cfg.estimator;
  est.delta = cfg.fixed_delta ? *cfg.fixed_delta : delta_schedule(m, cfg.estimator);
  std::vector<Replication> reps(cfg.reps);
  parallel_for(cfg.reps, [&](std::size_t r) {
    with_context(fmt::format("m={}, rep={}", m, r), [&] {
      const SampleBatch batch = sample(cfg.source, m, derive_seed(seed, {m, r}));
      Replication& out = reps[r];
      out.m = m;
      out.rep = r;
      out.estimate = ubsr_sb(batch, est, cfg.loss, cfg.lambda);
      if (reference) out.err = out.estimate.t_hat - *reference;
    });
  });
  return reps;
}

ErrorStatsRow summarize_errors(std::size_t m, const std::vector<double>& errors) {
  ErrorStatsRow row{};
  row.m = m;
  row.reps = errors.size();
  row.mean_err = mean(errors);
  double sq = 0.0;
  for (const double e : errors) sq += e * e;
  row.mse = sq / static_cast<double>(errors.size());
  row.mse_times_m = row.mse * static_cast<double>(m);
  row.q05 = quantile(errors, 0.05);
  row.q25 = quantile(errors, 0.25);
  row.q50 = quantile(errors, 0.50);
  row.q75 = quantile(errors, 0.75);
  row.q95 = quantile(errors, 0.95);
  return row;
}

ErrorStats run_estimate_study(const EstimateStudyConfig& cfg, std::uint64_t seed,
                              const std::optional<std::filesystem::path>& out_dir) {
  prepare_dir(out_dir);
  ErrorStats stats;
  std::vector<std::size_t> without_reference;
  for (const std::size_t m : cfg.m_list) {
    const auto reps = replicate_estimates(cfg, m, seed);
    if (out_dir) {
      auto out = open_csv(*out_dir / fmt::format("errors_m{}.csv", m));
      out << "m,rep,t_hat,delta,err,iters_search,iters_bisect\n";
      for (const auto& r : reps) {
        out << fmt::format("{},{},{},{},{},{},{}\n", r.m, r.rep, num(r.estimate.t_hat), num(r.estimate.delta),
                           r.err ? num(*r.err) : "", r.estimate.iters_search, r.estimate.iters_bisect);
      }
    }
    if (!reps.front().err) {
      without_reference.push_back(m);
      continue;
    }
    std::vector<double> errors;
    errors.reserve(reps.size());
    for (const auto& r : reps) errors.push_back(*r.err);
    stats.push_back(summarize_errors(m, errors));
  }
  if (out_dir) {
    auto out = open_csv(*out_dir / "summary.csv");
    out << "m,reps,mean_err,mse,mse_times_m,q05,q25,q50,q75,q95\n";
    for (const auto& s : stats) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.m, s.reps, num(s.mean_err), num(s.mse),
                         num(s.mse_times_m), num(s.q05), num(s.q25), num(s.q50), num(s.q75), num(s.q95));
    }
    for (const std::size_t m : without_reference) out << fmt::format("{},{},,,,,,,,\n", m, cfg.reps);
  }
  return stats;
}

ErrorStats run_estimate_study(const RunSpec& spec) {
  return run_estimate_study(load_for<EstimateStudyConfig>(spec), spec.seed, spec.out_dir);
}

// ---------------------------------------------------------------- rate check

RateReport run_rate_check(const EstimateStudyConfig& cfg, std::uint64_t seed,
                          const std::optional<std::filesystem::path>& out_dir) {
  if (cfg.m_list.size() < 3) {
    throw Error(ErrorCode::InsufficientData, fmt::format("rate check needs >= 3 m values, got {}", cfg.m_list.size()));
  }
  if (!reference_ubsr(cfg)) {
    throw Error(ErrorCode::InvalidParameter, "rate check needs a reference UBSR for " + cfg.loss.describe());
  }
  RateReport report{};
  for (const std::size_t m : cfg.m_list) {
    double sq = 0.0;
    for (const auto& r : replicate_estimates(cfg, m, seed)) sq += *r.err * *r.err;
    report.m.push_back(m);
    report.mse.push_back(sq / static_cast<double>(cfg.reps));
  }
  std::vector<double> ms(report.m.begin(), report.m.end());
  report.fit = loglog_fit(ms, report.mse);
  report.implied_constant = std::exp(report.fit.intercept);

  const LossConstants lc = constants(cfg.loss, cfg.domain_halfwidth);
  const double T = cfg.moment_t.value_or(std::hypot(cfg.source.mu, cfg.source.sigma));
  report.regime = lc.regime;
  if (lc.regime == Regime::Lipschitz) {
    report.theoretical_constant = 108.0 * lc.L1 * lc.L1 * T * T / (lc.b * lc.b);
  } else {
    report.theoretical_constant = (540.0 * lc.L2 * lc.L2 + 108.0 * lc.a * lc.a) * std::pow(T, 4) / (lc.b * lc.b);
  }

  if (out_dir) {
    prepare_dir(out_dir);
    auto rows = open_csv(*out_dir / "rate.csv");
    rows << "m,reps,mse,mse_times_m\n";
    for (std::size_t i = 0; i < report.m.size(); ++i) {
      rows << fmt::format("{},{},{},{}\n", report.m[i], cfg.reps, num(report.mse[i]),
                          num(report.mse[i] * static_cast<double>(report.m[i])));
    }
    auto summary = open_csv(*out_dir / "rate_summary.csv");
    summary << "regime,slope,intercept,implied_constant,theoretical_constant\n";
    summary << fmt::format("{},{},{},{},{}\n", lc.regime == Regime::Lipschitz ? "lipschitz" : "smooth",
                           num(report.fit.slope), num(report.fit.intercept), num(report.implied_constant),
                           num(report.theoretical_constant));
  }
  return report;
}

RateReport run_rate_check(const RunSpec& spec) {
  return run_rate_check(load_for<EstimateStudyConfig>(spec), spec.seed, spec.out_dir);
}

// ------------------------------------------------------------ gradient check

GradCheckConfig GradCheckConfig::from(const Config& cfg) {
  cfg.check_known({"d", "mu", "sigma", "box", "seed", "loss", "lambda", "theta", "m", "reps", "d1", "schedule",
                   "max_doublings"});
  GradCheckConfig out{cfg.get_portfolio()};
  out.loss = cfg.get_loss();
  out.lambda = lambda_from(cfg);
  out.m_list = cfg.get_size_list("m");
  out.reps = cfg.get_size("reps", 500);
  out.estimator = estimator_from(cfg);
  const std::string& spec = cfg.raw("theta");
  std::string_view rest = spec;
  while (true) {
    const auto semi = rest.find(';');
    const std::string_view item = trim(rest.substr(0, semi));
    if (item == "optimum") {
      try {
        out.thetas.push_back(portfolio_argmin_oracle(out.model, out.loss.exponential_beta()));
      } catch (const Error& e) {
        throw ConfigError(cfg.line("theta"), "theta: optimum unavailable: " + e.detail());
      }
    } else {
      Config single = Config::parse("theta = " + std::string(item));
      std::vector<double> values;
      try {
        values = single.get_list("theta");
      } catch (const ConfigError& e) {
        // The inner parse numbers its single line as 1; report the real one.
        const std::string_view inner = e.detail();
        throw ConfigError(cfg.line("theta"), std::string(inner.starts_with("line 1: ") ? inner.substr(8) : inner));
      }
      if (values.size() != out.model.dim()) {
        throw ConfigError(cfg.line("theta"), fmt::format("theta needs {} entries", out.model.dim()));
      }
      out.thetas.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
  }
  return out;
}

GradCheckReport run_grad_check(const GradCheckConfig& cfg, std::uint64_t seed,
                               const std::optional<std::filesystem::path>& out_dir) {
  prepare_dir(out_dir);
  const auto d = static_cast<Eigen::Index>(cfg.model.dim());
  GradCheckReport report;
  struct Rep {
    UbsrGradientSample sample;
    std::optional<double> err_l2;
  };
  std::vector<std::vector<double>> mse_by_theta(cfg.thetas.size());

  for (const std::size_t m : cfg.m_list) {
    std::ofstream csv;
    if (out_dir) {
      csv = open_csv(*out_dir / fmt::format("grad_m{}.csv", m));
      csv << "m,rep,theta_id";
      for (Eigen::Index i = 1; i <= d; ++i) csv << ",j_" << i;
      csv << ",t_hat,denom,err_l2\n";
    }
    for (std::size_t id = 0; id < cfg.thetas.size(); ++id) {
      const Vector& theta = cfg.thetas[id];
      std::optional<Vector> exact;
      if (cfg.loss.is_exponential()) {
        exact = portfolio_ubsr_gradient_oracle(theta, cfg.model, cfg.loss.exponential_beta());
      }
      std::vector<Rep> reps(cfg.reps);
      parallel_for(cfg.reps, [&](std::size_t r) {
        with_context(fmt::format("theta_id={}, m={}, rep={}", id, m, r), [&] {
          reps[r].sample = ubsr_and_gradient(theta, m, cfg.estimator, cfg.model, cfg.loss, cfg.lambda,
                                             derive_seed(seed, {id, m, r}));
          if (exact) reps[r].err_l2 = (reps[r].sample.gradient.j - *exact).norm();
        });
      });

      GradCheckRow row{id, m, cfg.reps, kNaN, 0.0, kNaN};
      Vector sum = Vector::Zero(d);
      double sq_err = 0.0;
      for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& g = reps[r].sample.gradient;
        sum += g.j;
        row.mean_sq_norm += g.j.squaredNorm();
        if (reps[r].err_l2) sq_err += *reps[r].err_l2 * *reps[r].err_l2;
        if (out_dir) {
          csv << fmt::format("{},{},{}", m, r, id);
          for (const double v : g.j) csv << ',' << num(v);
          csv << fmt::format(",{},{},{}\n", num(g.t_hat), num(g.denom), reps[r].err_l2 ? num(*reps[r].err_l2) : "");
        }
      }
      const auto n = static_cast<double>(cfg.reps);
      row.mean_sq_norm /= n;
      if (exact) {
        row.mse = sq_err / n;
        row.bias_l2 = (sum / n - *exact).norm();
      }
      mse_by_theta[id].push_back(row.mse);
      report.rows.push_back(row);
    }
  }

  std::vector<double> ms(cfg.m_list.begin(), cfg.m_list.end());
  for (const auto& mse : mse_by_theta) {
    const bool fittable = std::all_of(mse.begin(), mse.end(), [](double v) { return v > 0.0; });
    if (ms.size() >= 2 && fittable) {
      report.fits.push_back(loglog_fit(ms, mse));
    } else {
      report.fits.push_back({kNaN, kNaN});
    }
  }

  if (out_dir) {
    auto summary = open_csv(*out_dir / "grad_summary.csv");
    summary << "theta_id,m,reps,mse,mean_sq_norm,bias_l2\n";
    for (const auto& r : report.rows) {
      summary << fmt::format("{},{},{},{},{},{}\n", r.theta_id, r.m, r.reps, num(r.mse), num(r.mean_sq_norm),
                             num(r.bias_l2));
    }
    auto fits = open_csv(*out_dir / "grad_fit.csv");
    fits << "theta_id,slope,intercept\n";
    for (std::size_t id = 0; id < report.fits.size(); ++id) {
      fits << fmt::format("{},{},{}\n", id, num(report.fits[id].slope), num(report.fits[id].intercept));
    }
  }
  return report;
}

GradCheckReport run_grad_check(const RunSpec& spec) {
  return run_grad_check(load_for<GradCheckConfig>(spec), spec.seed, spec.out_dir);
}

// -------------------------------------------------------------- optimization

OptimizeStudyConfig OptimizeStudyConfig::from(const Config& cfg) {
  cfg.check_known({"d", "mu", "sigma", "box", "seed", "loss", "lambda", "c", "batch", "n_iters", "d1", "theta0",
                   "seeds"});
  OptimizeStudyConfig out{cfg.get_portfolio()};
  out.loss = cfg.get_loss();
  out.lambda = lambda_from(cfg);
  if (cfg.has("c") && cfg.raw("c") != "auto") {
    out.c = cfg.get_double("c");
    if (!(*out.c > 0.0)) throw ConfigError(cfg.line("c"), "c must be positive");
  }
  out.batch = cfg.get_batch();
  out.n_iters = cfg.get_size("n_iters", 1000);
  out.d1 = cfg.get_double("d1", 1.0);
  if (!(out.d1 > 0.0)) throw ConfigError(cfg.line("d1"), "d1 must be positive");
  if (cfg.has("theta0")) {
    const auto values = cfg.get_list("theta0");
    if (values.size() != out.model.dim()) {
      throw ConfigError(cfg.line("theta0"), fmt::format("theta0 needs {} entries", out.model.dim()));
    }
    out.theta0 = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  out.seeds = cfg.get_size("seeds", 20);
  if (!out.c && !out.loss.is_exponential()) {
    throw ConfigError(cfg.line("loss"), "c = auto needs the exponential loss; set c explicitly");
  }
  return out;
}

OptimizeReport run_optimize_study(const OptimizeStudyConfig& cfg, std::uint64_t seed,
                                  const std::optional<std::filesystem::path>& out_dir) {
  prepare_dir(out_dir);
  OptimizeReport report;
  if (cfg.loss.is_exponential()) {
    report.theta_star = portfolio_argmin_oracle(cfg.model, cfg.loss.exponential_beta());
  }
  if (cfg.c) {
    report.c = *cfg.c;
  } else {
    report.c = suggest_c(cfg.model, cfg.loss.exponential_beta());
  }
  const auto d = static_cast<Eigen::Index>(cfg.model.dim());

  SGConfig base;
  base.c = report.c;
  base.batch = cfg.batch;
  base.n_iters = cfg.n_iters;
  base.d1 = cfg.d1;
  base.theta0 = cfg.theta0 ? *cfg.theta0 : project_box(Vector::Zero(d), cfg.model.box());
  base.theta_star = report.theta_star;

  report.traces.resize(cfg.seeds);
  parallel_for(cfg.seeds, [&](std::size_t s) {
    with_context(fmt::format("seed={}", s), [&] {
      SGConfig run = base;
      run.seed = derive_seed(seed, {s});
      std::optional<TraceCsvWriter> writer;
      if (out_dir) writer.emplace(*out_dir / fmt::format("trace_seed{}.csv", s), cfg.model.dim());
      report.traces[s] = ubsr_sg(run, cfg.model, cfg.loss, cfg.lambda, writer ? &*writer : nullptr);
    });
  });

  for (std::size_t i = 0; i < cfg.n_iters; ++i) {
    EnvelopeRow row{i + 1, kNaN, kNaN};
    if (report.theta_star) {
      std::vector<double> dist;
      std::vector<double> gap;
      for (const auto& t : report.traces) {
        dist.push_back(*t.records[i].dist_sq);
        if (t.records[i].h_gap) gap.push_back(*t.records[i].h_gap);
      }
      row.median_dist_sq = median(dist);
      if (!gap.empty()) row.median_h_gap = median(gap);
    }
    report.envelope.push_back(row);
  }
  if (report.theta_star) {
    std::vector<double> dist;
    for (const auto& r : report.envelope) dist.push_back(r.median_dist_sq);
    report.trend_violations = trend_violations(dist);
  }

  if (out_dir) {
    auto out = open_csv(*out_dir / "summary.csv");
    if (report.theta_star) {
      out << "# theta_star =";
      for (Eigen::Index i = 0; i < d; ++i) out << (i ? "," : " ") << num((*report.theta_star)[i]);
      out << '\n';
    }
    out << "# c = " << num(report.c) << '\n';
    if (report.trend_violations) out << "# trend_violations = " << *report.trend_violations << '\n';
    out << "k,median_dist_sq,median_h_gap\n";
    for (const auto& r : report.envelope) {
      out << fmt::format("{},{},{}\n", r.k, num(r.median_dist_sq), num(r.median_h_gap));
    }
  }
  return report;
}

OptimizeReport run_optimize_study(const RunSpec& spec) {
  return run_optimize_study(load_for<OptimizeStudyConfig>(spec), spec.seed, spec.out_dir);
}

}  // namespace srisk
