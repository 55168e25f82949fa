#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "minmax/config.hpp"
#include "minmax/csv.hpp"
#include "minmax/experiments.hpp"

// Config-file front end for the experiments. Sections:
//   [experiment]  kind, seed, budget, max_iters, tolerance, output, threads, ...
//   [game]        type plus the parameters of that type
//   [start]       x, y initial iterates
//   [params]      eta, beta, alpha, gamma_reg, alpha_x, alpha_y, adam_*, mu, q, delta, dt
//   [grid]        per-hyperparameter axes; [grid.<Method>] overrides per method
namespace minmax::bench {

inline Game game_from_config(const Config& c) {
  const auto type = c.str("game", "type", "bilinear");
  if (type == "bilinear") return Game::bilinear(c.matrix("game", "matrix"));
  if (type == "identity") return Game::identity(c.integer("game", "n", 1));
  if (type == "random_gaussian") {
    return Game::random_gaussian(c.integer("game", "n", 2),
                                 static_cast<std::uint64_t>(c.integer("game", "seed", 0)));
  }
  if (type == "quadratic_matrix") {
    return Game::quadratic_matrix(c.matrix("game", "h"), c.matrix("game", "a"), c.matrix("game", "g"));
  }
  if (type == "quadratic_scalar") return Game::quadratic_scalar(c.num("game", "h"));
  if (type == "scaled_separable") return Game::scaled_separable(c.num("game", "gamma"));
  if (type == "alignment") {
    return build_alignment_game(c.num("game", "theta", 0.0), c.num("game", "lambda1", 1.0),
                                c.num("game", "lambda2", 2.0));
  }
  throw ConfigError(c.source() + ": unknown game type '" + type + "'");
}

inline JointState start_from_config(const Config& c, const Game& g) {
  auto vec = [&](const char* key, Eigen::Index n) {
    if (!c.has("start", key)) return Vec(Vec::Ones(n));
    const auto v = c.numbers("start", key);
    if (static_cast<Eigen::Index>(v.size()) != n) {
      throw ConfigError(c.source() + ": [start] " + key + " has the wrong length");
    }
    return Vec(Eigen::Map<const Vec>(v.data(), n));
  };
  return JointState::at(vec("x", g.dim_x()), vec("y", g.dim_y()));
}

inline OptimizerConfig params_from_config(const Config& c) {
  OptimizerConfig o;
  o.eta = c.num("params", "eta", o.eta);
  o.beta = c.num("params", "beta", o.beta);
  o.alpha = c.num("params", "alpha", o.alpha);
  o.gamma_reg = c.num("params", "gamma_reg", o.gamma_reg);
  if (c.has("params", "alpha_x")) o.alpha_x = c.num("params", "alpha_x");
  if (c.has("params", "alpha_y")) o.alpha_y = c.num("params", "alpha_y");
  o.adam.beta1 = c.num("params", "adam_beta1", o.adam.beta1);
  o.adam.beta2 = c.num("params", "adam_beta2", o.adam.beta2);
  o.adam.eps = c.num("params", "adam_eps", o.adam.eps);
  if (c.has("params", "mu") && c.has("params", "q") && c.has("params", "delta")) {
    o.physical = PhysicalParams{c.num("params", "mu"), c.num("params", "q"), c.num("params", "delta")};
  }
  return o;
}

inline std::vector<Method> methods_from_config(const Config& c, std::vector<Method> fallback) {
  if (!c.has("experiment", "methods")) return fallback;
  std::vector<Method> out;
  for (const auto& name : c.strings("experiment", "methods")) out.push_back(parse_method(name));
  return out;
}

inline AxisMap axes_from_section(const Config& c, const std::string& section, AxisMap base = {}) {
  static const std::pair<const char*, HyperParam> keys[] = {{"eta", HyperParam::Eta},
                                                            {"beta", HyperParam::Beta},
                                                            {"alpha", HyperParam::Alpha},
                                                            {"gamma_reg", HyperParam::GammaReg}};
  for (const auto& [k, p] : keys) {
    if (c.has(section, k)) base[p] = parse_axis(c.str(section, k));
  }
  return base;
}

inline RunLimits limits_from_config(const Config& c, long default_iters) {
  RunLimits l;
  l.max_iters = c.integer("experiment", "max_iters", default_iters);
  l.tolerance = c.num("experiment", "tolerance", l.tolerance);
  l.divergence = c.num("experiment", "divergence", l.divergence);
  return l;
}

inline SweepSpec sweep_from_config(const Config& c, std::vector<Method> default_methods) {
  SweepSpec s;
  s.methods = methods_from_config(c, std::move(default_methods));
  s.common_axes = axes_from_section(c, "grid");
  for (Method m : s.methods) {
    const std::string sec = "grid." + std::string(to_string(m));
    if (c.has_section(sec)) s.axes[m] = axes_from_section(c, sec, s.common_axes);
  }
  s.base = params_from_config(c);
  s.budget = c.integer("experiment", "budget", 200);
  s.limits = limits_from_config(c, 2000);
  s.seed = c.seed(0);
  s.threads = static_cast<int>(c.integer("experiment", "threads", 1));
  return s;
}

// Output sink: the configured file, or `fallback` when no path is set.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty()) {
      out_ = &fallback;
    } else {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
      }
      file_ = std::make_unique<std::ofstream>(open_output(path));
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }
  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw IoError("failed writing '" + path_ + "'");
    }
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

// "<stem><suffix>.csv" next to `path`.
inline std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const auto stem = p.stem().string();
  return (p.parent_path() / (stem + suffix + (p.has_extension() ? p.extension().string() : ".csv"))).string();
}

inline const std::vector<Method>& alignment_methods() {
  static const std::vector<Method> m = {Method::GDA, Method::MomentumGDA, Method::LEAD,
                                        Method::OGDA, Method::ExtraGradient, Method::SGA,
                                        Method::CO, Method::CGD, Method::LOLA};
  return m;
}

inline void run_sweep_experiment(const Config& c, std::ostream& out, std::ostream& log) {
  const Game game = game_from_config(c);
  const auto spec = sweep_from_config(c, {Method::GDA, Method::LEAD});
  const auto results = run_sweep(game, start_from_config(c, game), spec);
  const auto output = c.str("experiment", "output", "");
  Sink runs(output, out);
  write_runs_csv(runs.stream(), results);
  runs.close();
  const auto summary_path = c.str("experiment", "summary", output.empty() ? "" : sibling(output, "_best"));
  if (!summary_path.empty()) {
    Sink s(summary_path, out);
    write_summary_csv(s.stream(), summarize(results));
    s.close();
  }
  log << "sweep: " << results.size() << " runs\n";
}

inline void run_alignment_experiment(const Config& c, std::ostream& out, std::ostream& log) {
  const auto thetas = c.has("experiment", "theta") ? c.numbers("experiment", "theta")
                                                   : std::vector<double>{0, 15, 30, 45, 60, 75, 90};
  const double l1 = c.num("game", "lambda1", 1.0), l2 = c.num("game", "lambda2", 2.0);
  const auto spec = sweep_from_config(c, alignment_methods());
  const auto output = c.str("experiment", "output", "");
  Sink sink(output, out);
  bool first = true;
  for (double theta : thetas) {
    const Game game = build_alignment_game(theta, l1, l2);
    const auto results = run_sweep(game, start_from_config(c, game), spec);
    if (!output.empty()) {
      Sink runs(sibling(output, "_theta" + format_double(theta)), out);
      write_runs_csv(runs.stream(), results);
      runs.close();
    }
    std::ostringstream block;
    write_summary_csv(block, summarize(results), theta);
    std::string text = block.str();
    if (!first) text = text.substr(text.find('\n') + 1);  // one header per file
    sink.stream() << text;
    first = false;
    log << "alignment: theta=" << format_double(theta) << " done\n";
  }
  sink.close();
}

inline void run_ogda_experiment(const Config& c, std::ostream& out, std::ostream& log) {
  const auto gammas = c.has("experiment", "gamma") ? c.numbers("experiment", "gamma")
                                                   : std::vector<double>{1.0, 6.0};
  const auto etas = c.has("grid", "eta") ? c.numbers("grid", "eta") : logspace(1e-4, 1.0, 30);
  const auto methods = methods_from_config(c, ogda_failure_methods());
  const auto limits = limits_from_config(c, 100000);
  const auto suite = ogda_failure_suite(gammas, etas, limits.max_iters, params_from_config(c), methods,
                                        limits.tolerance,
                                        static_cast<int>(c.integer("experiment", "threads", 1)));
  Sink sink(c.str("experiment", "output", ""), out);
  write_ogda_csv(sink.stream(), suite);
  for (double g : gammas) {
    for (Method m : methods) {
      sink.stream() << "# gamma=" << format_double(g) << ' ' << to_string(m)
                    << " any_converged=" << (suite.any_converged(g, m) ? "true" : "false") << '\n';
    }
  }
  sink.close();
  log << "ogda_failure: " << suite.cells.size() << " runs\n";
}

inline void run_cost_experiment(const Config& c, std::ostream& out, std::ostream&) {
  const Game game = game_from_config(c);
  const auto methods = methods_from_config(c, {Method::GDA, Method::ExtraGradient, Method::LEAD,
                                               Method::CGD});
  const auto rows = cost_table(methods, game, c.integer("experiment", "iters", 100),
                               params_from_config(c), start_from_config(c, game));
  Sink sink(c.str("experiment", "output", ""), out);
  write_cost_csv(sink.stream(), rows);
  sink.close();
}

inline void run_spectra_experiment(const Config& c, std::ostream& out, std::ostream&) {
  const Mat a = c.has("game", "matrix") ? c.matrix("game", "matrix") : game_from_config(c).coupling();
  const auto p = params_from_config(c);
  const auto method = c.str("experiment", "method", "lead");
  SpectralReport r;
  double mismatch = 0.0;
  if (method == "gda") {
    r = gda_spectrum(a, p.eta);
    mismatch = multiset_distance(numeric_spectrum(assemble_gda_operator(a, p.eta)).eigenvalues, r.eigenvalues);
  } else if (method == "lead") {
    r = lead_spectrum(a, p.eta, p.beta, p.alpha);
    mismatch = multiset_distance(
        numeric_spectrum(assemble_lead_operator(a, p.eta, p.beta, p.alpha)).eigenvalues, r.eigenvalues);
  } else {
    throw ConfigError(c.source() + ": spectra method must be 'lead' or 'gda'");
  }
  Sink sink(c.str("experiment", "output", ""), out);
  write_spectra_csv(sink.stream(), r, mismatch);
  sink.close();
}

inline void run_flow_experiment(const Config& c, std::ostream& out, std::ostream&) {
  const Game game = game_from_config(c);
  const auto start = start_from_config(c, game);
  const double mu = c.num("params", "mu", 1.0);
  const double q = c.num("params", "q", 2.0 / mu + mu);
  const auto conv = c.str("params", "convention", "single") == "double" ? ChargeConvention::DoubleQ
                                                                         : ChargeConvention::SingleQ;
  const auto traj = rk4_integrate(game, FlowState::at_rest(start.x, start.y), mu, q,
                                  c.num("params", "dt", 1e-3), c.integer("experiment", "steps", 1000),
                                  conv, c.integer("experiment", "record_every", 1));
  Sink sink(c.str("experiment", "output", ""), out);
  write_flow_csv(sink.stream(), game, traj, mu);
  sink.close();
}

inline void run_lyapunov_experiment(const Config& c, std::ostream& out, std::ostream&) {
  const auto mode = c.str("experiment", "mode", "discrete");
  const double mu = c.num("params", "mu", 1.0);
  std::optional<double> q;
  if (c.has("params", "q")) q.emplace(c.num("params", "q"));
  LyapunovRun run;
  if (mode == "discrete") {
    const Game game = game_from_config(c);
    if (game.kind() != GameKind::QuadraticScalar) {
      throw ConfigError(c.source() + ": discrete lyapunov needs a quadratic_scalar game");
    }
    const auto start = start_from_config(c, game);
    run = discrete_lyapunov_run(game.scalar_param(), mu, c.num("params", "delta", 1.0), q,
                                c.integer("experiment", "steps", 10000), start.x[0], start.y[0]);
  } else if (mode == "continuous") {
    const Game game = game_from_config(c);
    if (game.kind() != GameKind::Bilinear) {
      throw ConfigError(c.source() + ": continuous lyapunov needs a bilinear game");
    }
    const auto start = start_from_config(c, game);
    run = continuous_lyapunov_run(game.coupling(), mu, q, c.num("params", "dt", 1e-3),
                                  c.integer("experiment", "steps", 20000), start.x, start.y,
                                  c.integer("experiment", "record_every", 1),
                                  c.num("experiment", "slack", 1.05));
  } else {
    throw ConfigError(c.source() + ": lyapunov mode must be 'discrete' or 'continuous'");
  }
  Sink sink(c.str("experiment", "output", ""), out);
  write_lyapunov_csv(sink.stream(), run);
  sink.close();
}

inline void run_rate_experiment(const Config& c, std::ostream& out, std::ostream&) {
  const Mat a = c.has("game", "matrix") ? c.matrix("game", "matrix") : game_from_config(c).coupling();
  const auto tuned = tuned_lead_rate(a);
  const double eta = c.num("params", "eta", tuned.eta_alpha);
  const double alpha = c.num("params", "alpha", tuned.eta_alpha);
  const double beta = c.num("params", "beta", 0.0);
  const Game game = Game::bilinear(a);
  const auto rv = rate_validation(a, eta, beta, alpha, c.integer("experiment", "fit_from", 100),
                                  c.integer("experiment", "fit_to", 2000), start_from_config(c, game));
  Sink sink(c.str("experiment", "output", ""), out);
  CsvWriter w(sink.stream(), {"t", "log_delta"});
  for (std::size_t t = 0; t < rv.log_delta.size(); ++t) w.row(CsvRow().add(t).add(rv.log_delta[t]));
  w.comment("fitted_rate=" + format_double(rv.fitted) + " spectral_rate=" + format_double(rv.predicted) +
            " tuned_rate=" + format_double(tuned.rate));
  sink.close();
}

inline void run_experiment(const Config& c, std::ostream& out, std::ostream& log) {
  const auto kind = c.str("experiment", "kind");
  if (kind == "sweep") return run_sweep_experiment(c, out, log);
  if (kind == "alignment") return run_alignment_experiment(c, out, log);
  if (kind == "ogda_failure") return run_ogda_experiment(c, out, log);
  if (kind == "rate_validation") return run_rate_experiment(c, out, log);
  if (kind == "lyapunov_decay") return run_lyapunov_experiment(c, out, log);
  if (kind == "cost_table") return run_cost_experiment(c, out, log);
  if (kind == "spectra") return run_spectra_experiment(c, out, log);
  if (kind == "flow") return run_flow_experiment(c, out, log);
  throw ConfigError(c.source() + ": unknown experiment kind '" + kind + "'");
}

}  // namespace minmax::bench
