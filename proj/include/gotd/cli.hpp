#pragma once

#include "gotd/algorithm.hpp"
#include "gotd/feasibility.hpp"
#include "gotd/problems.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gotd::cli {

enum class Experiment { Sphere, Hyperbolic, Modes };

inline const char *to_string(Experiment e) {
  switch (e) {
  case Experiment::Sphere:
    return "sphere";
  case Experiment::Hyperbolic:
    return "hyperbolic";
  case Experiment::Modes:
    return "modes";
  }
  return "unknown";
}

struct RunConfig {
  Experiment experiment = Experiment::Sphere;

  // sphere: Ob(m, n) ∩ M_r with oversampling os
  // hyperbolic: (n+1) x m embeddings, synthetic rank r_true, solve rank r
  // modes: n grid points, p modes on [0, L], s = rho * n * p
  Index m = 500;
  Index n = 600;
  Index r = 5;
  double os = 6.0;
  Index r_true = 5;
  double noise = 0.25;
  Index p = 5;
  double L = 50.0;
  double rho = 0.6;

  GotdConfig solver;
  std::uint64_t seed_last = 0; // == solver.seed unless --seeds a..b
  std::string out_path;
  bool postprocess_map = false;
  bool timing = true;

  bool show_help = false;
  std::string help_text;
};

namespace detail {

inline std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string &s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    throw Error(ErrorKind::UsageError, "--seeds expects a..b, got '" + s + "'");
  }
  try {
    const std::uint64_t a = std::stoull(s.substr(0, dots));
    const std::uint64_t b = std::stoull(s.substr(dots + 2));
    if (b < a) {
      throw Error(ErrorKind::UsageError, "--seeds: empty range '" + s + "'");
    }
    return {a, b};
  } catch (const std::logic_error &) {
    throw Error(ErrorKind::UsageError, "--seeds expects a..b, got '" + s + "'");
  }
}

} // namespace detail

/// Parses `<experiment> [--key value]... [--config path]`. Flags override
/// values read from the key=value config file; unset parameters take the
/// per-experiment defaults. Throws Error(UsageError) on bad input.
inline RunConfig parse_config(const std::vector<std::string> &args) {
  CLI::App app{"Runs the orthogonal-tangent-directions method on one of the "
               "benchmark problems and writes a CSV trace.",
               "gotd_bench"};
  app.allow_config_extras(false);
  app.set_config("--config", "", "key=value configuration file");

  std::string experiment;
  std::optional<Index> m, n, r, r_true, p;
  std::optional<double> os, noise, L, rho, alpha, beta, tol;
  std::optional<int> max_iter, trace_every;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seeds;
  std::string out_path;
  bool postprocess_map = false;
  bool no_timing = false;

  app.add_option("experiment", experiment, "sphere | hyperbolic | modes")
      ->required()
      ->check(CLI::IsMember({"sphere", "hyperbolic", "modes"}));
  app.add_option("--m", m, "rows (sphere) or number of points (hyperbolic)")
      ->check(CLI::PositiveNumber);
  app.add_option("--n", n, "columns (sphere), spatial dimension (hyperbolic) "
                           "or grid size (modes)")
      ->check(CLI::PositiveNumber);
  app.add_option("--r", r, "rank parameter")->check(CLI::PositiveNumber);
  app.add_option("--os", os, "oversampling factor")->check(CLI::PositiveNumber);
  app.add_option("--r-true", r_true, "rank of the synthetic embeddings")
      ->check(CLI::PositiveNumber);
  app.add_option("--noise", noise, "off-subspace noise of synthetic embeddings")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--p", p, "number of modes")->check(CLI::PositiveNumber);
  app.add_option("--L", L, "interval length")->check(CLI::PositiveNumber);
  app.add_option("--rho", rho, "sparsity level, s = rho n p")
      ->check(CLI::PositiveNumber & CLI::Range(0.0, 1.0));
  app.add_option("--alpha", alpha, "feasibility step")->check(CLI::PositiveNumber);
  app.add_option("--beta", beta, "optimality step")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "termination threshold on max(|G_h|, |G_f|)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
  app.add_option("--trace-every", trace_every)->check(CLI::PositiveNumber);
  auto *seed_opt = app.add_option("--seed", seed);
  auto *seeds_opt = app.add_option("--seeds", seeds, "run seeds a..b in turn");
  seed_opt->excludes(seeds_opt);
  app.add_option("--out", out_path, "trace CSV path");
  app.add_flag("--postprocess-map", postprocess_map,
               "hyperbolic: alternating projections after the run");
  app.add_flag("--no-timing", no_timing,
               "write zeros in the trace time column");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  RunConfig cfg;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    cfg.show_help = true;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::Error &e) {
    throw Error(ErrorKind::UsageError, e.what());
  }

  auto reject = [](bool present, const char *flag, const std::string &exp) {
    if (present) {
      throw Error(ErrorKind::UsageError,
                  std::string(flag) + " does not apply to experiment " + exp);
    }
  };

  if (experiment == "sphere") {
    cfg.experiment = Experiment::Sphere;
    cfg.m = m.value_or(500);
    cfg.n = n.value_or(600);
    cfg.r = r.value_or(5);
    cfg.os = os.value_or(6.0);
    cfg.solver.beta = beta.value_or(10.0);
    reject(r_true.has_value(), "--r-true", experiment);
    reject(noise.has_value(), "--noise", experiment);
    reject(p.has_value(), "--p", experiment);
    reject(L.has_value(), "--L", experiment);
    reject(rho.has_value(), "--rho", experiment);
    reject(postprocess_map, "--postprocess-map", experiment);
    if (cfg.r > std::min(cfg.m, cfg.n)) {
      throw Error(ErrorKind::UsageError, "--r exceeds min(m, n)");
    }
  } else if (experiment == "hyperbolic") {
    cfg.experiment = Experiment::Hyperbolic;
    cfg.n = n.value_or(60);
    cfg.m = m.value_or(300);
    cfg.r_true = r_true.value_or(5);
    cfg.r = r.value_or(5);
    cfg.noise = noise.value_or(0.25);
    cfg.solver.beta = beta.value_or(0.2);
    reject(os.has_value(), "--os", experiment);
    reject(p.has_value(), "--p", experiment);
    reject(L.has_value(), "--L", experiment);
    reject(rho.has_value(), "--rho", experiment);
    if (cfg.r + 1 > std::min(cfg.n + 1, cfg.m) || cfg.r > cfg.n ||
        cfg.r_true > cfg.n) {
      throw Error(ErrorKind::UsageError, "rank parameters too large");
    }
  } else {
    cfg.experiment = Experiment::Modes;
    cfg.n = n.value_or(128);
    cfg.p = p.value_or(5);
    cfg.L = L.value_or(50.0);
    cfg.rho = rho.value_or(0.6);
    cfg.solver.beta = beta.value_or(
        cfg.L * cfg.L / (4.0 * static_cast<double>(cfg.n * cfg.n)));
    reject(m.has_value(), "--m", experiment);
    reject(r.has_value(), "--r", experiment);
    reject(os.has_value(), "--os", experiment);
    reject(r_true.has_value(), "--r-true", experiment);
    reject(noise.has_value(), "--noise", experiment);
    reject(postprocess_map, "--postprocess-map", experiment);
    if (cfg.p > cfg.n) {
      throw Error(ErrorKind::UsageError, "--p exceeds --n");
    }
  }

  cfg.solver.alpha = alpha.value_or(1.0);
  cfg.solver.tol = tol.value_or(1e-10);
  cfg.solver.max_iter = max_iter.value_or(2000);
  cfg.solver.trace_every = trace_every.value_or(1);
  if (seeds) {
    const auto [a, b] = detail::parse_seed_range(*seeds);
    cfg.solver.seed = a;
    cfg.seed_last = b;
  } else {
    cfg.solver.seed = seed.value_or(1);
    cfg.seed_last = cfg.solver.seed;
  }
  cfg.out_path = out_path;
  cfg.postprocess_map = postprocess_map;
  cfg.timing = !no_timing;
  return cfg;
}

inline RunConfig parse_config(int argc, const char *const *argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return parse_config(args);
}

/// Outcome of one seeded run, as reported on the summary line.
struct RunSummary {
  RunStatus status = RunStatus::MaxIter;
  int iterations = 0;
  double time_s = 0.0;
  double f_value = 0.0;
  double feas_norm = 0.0;
  std::optional<double> extra;
  std::optional<int> map_iterations;
  std::optional<double> map_feas;
  std::optional<double> map_extra;
  std::string abort_reason;
  std::vector<TraceRecord> trace;
};

inline int exit_code(RunStatus s) {
  switch (s) {
  case RunStatus::Converged:
    return 0;
  case RunStatus::MaxIter:
    return 2;
  case RunStatus::Aborted:
    return 1;
  }
  return 1;
}

namespace detail {

template <class Point>
RunSummary summarize(RunResult<Point> &&res) {
  RunSummary s;
  s.status = res.status;
  s.iterations = res.iterations;
  s.abort_reason = std::move(res.abort_reason);
  if (!res.trace.empty()) {
    const TraceRecord &last = res.trace.back();
    s.time_s = last.wall_seconds;
    s.f_value = last.f_value;
    s.feas_norm = last.feas_norm;
    s.extra = last.extra;
  }
  s.trace = std::move(res.trace);
  return s;
}

} // namespace detail

/// Builds the problem for `seed`, runs the method and (for the hyperbolic
/// experiment, on request) alternating-projection post-processing.
inline RunSummary run_single(const RunConfig &cfg, std::uint64_t seed) {
  GotdConfig solver = cfg.solver;
  solver.seed = seed;
  switch (cfg.experiment) {
  case Experiment::Sphere: {
    auto data = std::make_shared<const SphereFitProblem>(
        gen_sphere_data(cfg.m, cfg.n, cfg.r, cfg.os, seed));
    const SphereProblem problem = make_sphere_problem(data);
    const FactoredPoint x0 = init_sphere(*data, seed);
    return detail::summarize(gotd_run(problem, x0, solver, [data](const Matrix &X) {
      return sphere_test_error(*data, X);
    }));
  }
  case Experiment::Hyperbolic: {
    auto data = std::make_shared<const HyperbolicFitProblem>(
        gen_hyperbolic_data(cfg.n, cfg.m, cfg.r_true, seed, cfg.noise));
    const HyperbolicProblem problem = make_hyperbolic_problem(data, cfg.r);
    const FactoredPoint x0 = init_hyperbolic(*data, cfg.r);
    const double f0 = hyperbolic_objective(*data, x0.dense());
    auto res = gotd_run(problem, x0, solver, [data, f0](const Matrix &X) {
      return hyperbolic_objective(*data, X) / f0;
    });
    const bool run_map = cfg.postprocess_map && res.status != RunStatus::Aborted;
    const Matrix last = res.final_point.dense();
    RunSummary s = detail::summarize(std::move(res));
    if (run_map) {
      const auto map = alternating_projections(problem.manifold,
                                               problem.constraint, last, 1e-10,
                                               1000);
      s.map_iterations = map.iterations;
      s.map_feas = map.feas_norm;
      s.map_extra = hyperbolic_objective(*data, map.point.dense()) / f0;
    }
    return s;
  }
  case Experiment::Modes: {
    auto data = std::make_shared<const CompressedModesProblem>(
        gen_modes_problem(cfg.n, cfg.p, cfg.L, cfg.rho));
    const ModesProblem problem = make_modes_problem(data);
    const SupportPoint x0 = init_modes(*data, seed);
    return detail::summarize(gotd_run(problem, x0, solver, [](const Matrix &X) {
      return sparsity_ratio(X);
    }));
  }
  }
  throw Error(ErrorKind::UsageError, "unknown experiment");
}

inline std::string summary_line(const RunConfig &cfg, const RunSummary &s) {
  std::ostringstream os;
  os << "experiment=" << to_string(cfg.experiment)
     << " status=" << gotd::to_string(s.status) << " iters=" << s.iterations
     << " time_s=" << format_scientific(s.time_s)
     << " f=" << format_scientific(s.f_value)
     << " feas=" << format_scientific(s.feas_norm) << " extra="
     << (s.extra ? format_scientific(*s.extra) : std::string("nan"));
  if (s.map_iterations) {
    os << " map_iters=" << *s.map_iterations
       << " map_feas=" << format_scientific(*s.map_feas)
       << " map_extra=" << format_scientific(*s.map_extra);
  }
  return os.str();
}

/// Trace path for one seed: `out` itself for a single run, otherwise
/// `<stem>.seed<k><ext>`.
inline std::string trace_path(const RunConfig &cfg, std::uint64_t seed) {
  if (cfg.out_path.empty() || cfg.seed_last == cfg.solver.seed) {
    return cfg.out_path;
  }
  const auto dot = cfg.out_path.find_last_of('.');
  const auto slash = cfg.out_path.find_last_of('/');
  const bool has_ext =
      dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? cfg.out_path.substr(0, dot) : cfg.out_path;
  const std::string ext = has_ext ? cfg.out_path.substr(dot) : "";
  return stem + ".seed" + std::to_string(seed) + ext;
}

/// Exit code: 0 if every run converged, 1 if any aborted, 2 otherwise.
inline int run_experiment(const RunConfig &cfg, std::ostream &out,
                          std::ostream &err) {
  int worst = 0;
  for (std::uint64_t seed = cfg.solver.seed; seed <= cfg.seed_last; ++seed) {
    RunSummary s;
    try {
      s = run_single(cfg, seed);
    } catch (const Error &e) {
      err << "seed " << seed << ": " << e.what() << '\n';
      worst = 1;
      continue;
    }
    if (s.status == RunStatus::Aborted) {
      err << "seed " << seed << ": aborted at " << s.abort_reason << '\n';
    }
    const std::string path = trace_path(cfg, seed);
    if (!path.empty()) {
      std::ofstream file(path);
      if (!file) {
        err << "cannot write trace to " << path << '\n';
        worst = 1;
      } else {
        write_trace_csv(file, s.trace, cfg.timing);
      }
    }
    out << summary_line(cfg, s) << '\n';
    const int code = exit_code(s.status);
    if (code == 1 || (code == 2 && worst == 0)) {
      worst = code;
    }
  }
  return worst;
}

} // namespace gotd::cli
