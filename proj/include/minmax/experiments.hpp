#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "minmax/config.hpp"
#include "minmax/csv.hpp"
#include "minmax/errors.hpp"
#include "minmax/game.hpp"
#include "minmax/lyapunov.hpp"
#include "minmax/ode_flow.hpp"
#include "minmax/optimizers.hpp"
#include "minmax/spectral.hpp"

namespace minmax {

// R_theta = [cos, sin; -sin, cos], exact at multiples of 90 degrees.
inline Mat rotation(double theta_deg) {
  double c = 0.0, s = 0.0;
  const double r = std::fmod(std::fmod(theta_deg, 360.0) + 360.0, 360.0);
  if (r == 0.0) {
    c = 1.0;
  } else if (r == 90.0) {
    s = 1.0;
  } else if (r == 180.0) {
    c = -1.0;
  } else if (r == 270.0) {
    s = -1.0;
  } else {
    const double t = theta_deg * std::numbers::pi / 180.0;
    c = std::cos(t);
    s = std::sin(t);
  }
  Mat m(2, 2);
  m << c, s, -s, c;
  return m;
}

// H = G = R90 L R90^T, A = R_theta L R90^T with L = diag(l1, l2).
inline Game build_alignment_game(double theta_a_deg, double lambda1 = 1.0, double lambda2 = 2.0) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw ConfigError("alignment eigenvalues must be positive");
  Mat lam = Mat::Zero(2, 2);
  lam(0, 0) = lambda1;
  lam(1, 1) = lambda2;
  const Mat r90 = rotation(90.0);
  const Mat h = r90 * lam * r90.transpose();
  return Game::quadratic_matrix(h, rotation(theta_a_deg) * lam * r90.transpose(), h);
}

enum class RunStatus { Converged, Diverged, Timeout };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Timeout: return "timeout";
  }
  return "unknown";
}

struct RunLimits {
  long max_iters = 2000;
  double tolerance = 1e-12;   // on dist_sq
  double divergence = 1e12;   // on ||w||
};

struct RunResult {
  Method method = Method::GDA;
  std::size_t cfg_index = 0;
  OptimizerConfig cfg;
  RunStatus status = RunStatus::Timeout;
  long steps = 0;  // iterations to tolerance, or the step at which the run stopped
  double final_dist_sq = 0.0;
  double final_norm = 0.0;
  long grad_evals = 0, jvp_evals = 0, linear_solves = 0;
  std::optional<double> fitted_rate;
  std::string note;

  std::optional<long> iters_to_tol() const {
    return status == RunStatus::Converged ? std::optional<long>(steps) : std::nullopt;
  }
};

namespace detail {

// exp of the least-squares slope of log values against their index.
inline std::optional<double> fit_log_slope(const std::vector<double>& logs, std::size_t from) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = from; i < logs.size(); ++i) {
    if (!std::isfinite(logs[i])) continue;
    const double x = static_cast<double>(i);
    n += 1;
    sx += x;
    sy += logs[i];
    sxx += x * x;
    sxy += x * logs[i];
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || !(den > 0.0)) return std::nullopt;
  return std::exp((n * sxy - sx * sy) / den);
}

}  // namespace detail

// Runs one method from `start` until dist_sq <= tolerance, ||w|| exceeds the
// divergence guard, a non-finite state appears, or max_iters elapse. The
// fitted rate is the per-step factor of dist_sq over the second half.
inline RunResult run_to_tolerance(Method method, const Game& game, const OptimizerConfig& cfg,
                                  const JointState& start, const RunLimits& limits) {
  RunResult r;
  r.method = method;
  r.cfg = cfg;
  Stepper stepper(method, game, cfg);
  JointState s = start;
  std::vector<double> logs;
  logs.push_back(std::log(s.dist_sq()));
  auto finish = [&](RunStatus st, long k) {
    r.status = st;
    r.steps = k;
    r.final_dist_sq = s.dist_sq();
    r.final_norm = std::sqrt(r.final_dist_sq);
    r.fitted_rate = detail::fit_log_slope(logs, logs.size() / 2);
    return r;
  };
  if (s.dist_sq() <= limits.tolerance) return finish(RunStatus::Converged, 0);
  for (long k = 1; k <= limits.max_iters; ++k) {
    try {
      auto rec = stepper.step(s);
      r.grad_evals += rec.grad_evals;
      r.jvp_evals += rec.jvp_evals;
      r.linear_solves += rec.linear_solves;
      s = std::move(rec.state);
    } catch (const NumericError& e) {
      r.note = e.what();
      return finish(RunStatus::Diverged, k);
    } catch (const SolverError& e) {
      r.note = e.what();
      return finish(RunStatus::Diverged, k);
    }
    const double d = s.dist_sq();
    logs.push_back(std::log(d));
    if (std::sqrt(d) > limits.divergence) return finish(RunStatus::Diverged, k);
    if (d <= limits.tolerance) return finish(RunStatus::Converged, k);
  }
  return finish(RunStatus::Timeout, limits.max_iters);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sample_axis(const Axis& axis, std::mt19937_64& rng) {
  if (const auto* pts = std::get_if<std::vector<double>>(&axis)) {
    if (pts->empty()) throw ConfigError("empty hyperparameter grid");
    return (*pts)[static_cast<std::size_t>(rng() % pts->size())];
  }
  const auto& d = std::get<Distribution>(axis);
  const double u = uniform01(rng);
  if (d.log) return std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)));
  return d.lo + u * (d.hi - d.lo);
}

inline Axis default_axis(HyperParam p) {
  if (p == HyperParam::Beta) return Distribution{false, -0.5, 0.9};
  return Distribution{true, 1e-4, 1.0};
}

inline void set_param(OptimizerConfig& c, HyperParam p, double v) {
  switch (p) {
    case HyperParam::Eta: c.eta = v; break;
    case HyperParam::Beta: c.beta = v; break;
    case HyperParam::Alpha: c.alpha = v; break;
    case HyperParam::GammaReg: c.gamma_reg = v; break;
  }
}

using AxisMap = std::map<HyperParam, Axis>;

// Hyperparameter configurations for one method. When every axis the method
// reads is an explicit list, the first `budget` points of their product are
// used in order; otherwise `budget` points are drawn with a generator seeded
// from the sweep seed and the method name.
inline std::vector<OptimizerConfig> sweep_configs(Method m, const AxisMap& axes,
                                                  const OptimizerConfig& base, long budget,
                                                  std::uint64_t seed) {
  if (budget < 1) throw ConfigError("budget must be at least 1");
  const auto params = method_hyperparameters(m);
  auto axis_of = [&](HyperParam p) {
    const auto it = axes.find(p);
    return it != axes.end() ? it->second : default_axis(p);
  };
  bool all_lists = true;
  for (auto p : params) all_lists = all_lists && std::holds_alternative<std::vector<double>>(axis_of(p));

  std::vector<OptimizerConfig> out;
  if (all_lists) {
    std::vector<std::vector<double>> lists;
    for (auto p : params) {
      lists.push_back(std::get<std::vector<double>>(axis_of(p)));
      if (lists.back().empty()) throw ConfigError("empty hyperparameter grid");
    }
    std::vector<std::size_t> idx(params.size(), 0);
    while (static_cast<long>(out.size()) < budget) {
      OptimizerConfig c = base;
      for (std::size_t i = 0; i < params.size(); ++i) set_param(c, params[i], lists[i][idx[i]]);
      out.push_back(c);
      std::size_t i = params.size();
      while (i > 0 && ++idx[i - 1] == lists[i - 1].size()) idx[--i] = 0;
      if (i == 0) break;
    }
    return out;
  }
  std::mt19937_64 rng(seed ^ fnv1a(to_string(m)));
  for (long b = 0; b < budget; ++b) {
    OptimizerConfig c = base;
    for (auto p : params) set_param(c, p, sample_axis(axis_of(p), rng));
    out.push_back(c);
  }
  return out;
}

struct SweepSpec {
  std::vector<Method> methods;
  std::map<Method, AxisMap> axes;  // missing methods use `common_axes`
  AxisMap common_axes;
  OptimizerConfig base;
  long budget = 200;
  RunLimits limits;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Runs every (method, config) pair; results are sorted by method name then
// config index so the output does not depend on scheduling or method order.
inline std::vector<RunResult> run_sweep(const Game& game, const JointState& start,
                                        const SweepSpec& spec) {
  struct Job {
    Method m;
    std::size_t index;
    OptimizerConfig cfg;
  };
  std::vector<Job> jobs;
  for (Method m : spec.methods) {
    const auto it = spec.axes.find(m);
    const auto& axes = it != spec.axes.end() ? it->second : spec.common_axes;
    const auto cfgs = sweep_configs(m, axes, spec.base, spec.budget, spec.seed);
    for (std::size_t i = 0; i < cfgs.size(); ++i) jobs.push_back({m, i, cfgs[i]});
  }
  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      results[j] = run_to_tolerance(jobs[j].m, game, jobs[j].cfg, start, spec.limits);
      results[j].cfg_index = jobs[j].index;
    }
  };
  const int nthreads = std::max(1, spec.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    const auto na = to_string(a.method), nb = to_string(b.method);
    return na != nb ? na < nb : a.cfg_index < b.cfg_index;
  });
  return results;
}

struct MethodSummary {
  Method method;
  std::optional<RunResult> best;  // fewest iterations among converged runs
  long converged = 0, diverged = 0, timeout = 0;
};

inline std::vector<MethodSummary> summarize(const std::vector<RunResult>& results) {
  std::vector<MethodSummary> out;
  for (const auto& r : results) {
    if (out.empty() || out.back().method != r.method) out.push_back({r.method, std::nullopt, 0, 0, 0});
    auto& s = out.back();
    if (r.status == RunStatus::Converged) {
      ++s.converged;
      if (!s.best || r.steps < s.best->steps) s.best = r;
    } else if (r.status == RunStatus::Diverged) {
      ++s.diverged;
    } else {
      ++s.timeout;
    }
  }
  return out;
}

inline void write_runs_csv(std::ostream& out, const std::vector<RunResult>& results) {
  CsvWriter w(out, {"method", "cfg_index", "eta", "beta", "alpha", "gamma_reg", "iters_to_tol",
                    "status", "final_dist_sq", "grad_evals", "jvp_evals", "fitted_rate",
                    "stop_step"});
  for (const auto& r : results) {
    CsvRow row;
    row.add(to_string(r.method)).add(r.cfg_index).add(r.cfg.eta).add(r.cfg.beta).add(r.cfg.alpha)
        .add(r.cfg.gamma_reg);
    if (auto it = r.iters_to_tol()) row.add(*it); else row.empty();
    row.add(to_string(r.status)).add(r.final_dist_sq).add(r.grad_evals).add(r.jvp_evals);
    if (r.fitted_rate) row.add(*r.fitted_rate); else row.empty();
    row.add(r.steps);
    w.row(row);
  }
}

inline void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& summary,
                              std::optional<double> theta = std::nullopt) {
  std::vector<std::string> header = {"method", "best_cfg_index", "eta", "beta", "alpha",
                                     "gamma_reg", "iters_to_tol", "converged", "diverged",
                                     "timeout"};
  if (theta) header.insert(header.begin(), "theta_deg");
  CsvWriter w(out, header);
  for (const auto& s : summary) {
    CsvRow row;
    if (theta) row.add(*theta);
    row.add(to_string(s.method));
    if (s.best) {
      row.add(s.best->cfg_index).add(s.best->cfg.eta).add(s.best->cfg.beta).add(s.best->cfg.alpha)
          .add(s.best->cfg.gamma_reg).add(s.best->steps);
    } else {
      row.empty().empty().empty().empty().empty().empty();
    }
    row.add(s.converged).add(s.diverged).add(s.timeout);
    w.row(row);
  }
}

// Convergence of each method on gamma (x^2 - y^2) over a learning-rate grid.
struct OgdaCell {
  double gamma;
  Method method;
  double eta;
  RunResult run;
};

struct OgdaSuite {
  std::vector<OgdaCell> cells;

  bool any_converged(double gamma, Method m) const {
    return std::any_of(cells.begin(), cells.end(), [&](const OgdaCell& c) {
      return c.gamma == gamma && c.method == m && c.run.status == RunStatus::Converged;
    });
  }
};

inline const std::vector<Method>& ogda_failure_methods() {
  static const std::vector<Method> m = {Method::OGDA, Method::LEAD, Method::GDA, Method::CGD};
  return m;
}

inline OgdaSuite ogda_failure_suite(const std::vector<double>& gammas,
                                    const std::vector<double>& eta_grid, long max_iters,
                                    const OptimizerConfig& base = {},
                                    const std::vector<Method>& methods = ogda_failure_methods(),
                                    double tolerance = 1e-12, int threads = 1) {
  OgdaSuite suite;
  std::vector<Game> games;
  for (double g : gammas) games.push_back(Game::scaled_separable(g));
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (Method m : methods) {
      for (double eta : eta_grid) suite.cells.push_back({gammas[gi], m, eta, {}});
    }
  }
  const auto start = JointState::at(Vec::Ones(1), Vec::Ones(1));
  const RunLimits limits{max_iters, tolerance, 1e12};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < suite.cells.size(); j = next++) {
      auto& c = suite.cells[j];
      const auto gi = static_cast<std::size_t>(
          std::find(gammas.begin(), gammas.end(), c.gamma) - gammas.begin());
      OptimizerConfig cfg = base;
      cfg.eta = c.eta;
      cfg.physical.reset();
      c.run = run_to_tolerance(c.method, games[gi], cfg, start, limits);
      c.run.cfg_index = j;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, threads); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return suite;
}

inline void write_ogda_csv(std::ostream& out, const OgdaSuite& suite) {
  CsvWriter w(out, {"gamma", "method", "eta", "status", "iters_to_tol", "stop_step",
                    "final_dist_sq"});
  for (const auto& c : suite.cells) {
    CsvRow row;
    row.add(c.gamma).add(to_string(c.method)).add(c.eta).add(to_string(c.run.status));
    if (auto it = c.run.iters_to_tol()) row.add(*it); else row.empty();
    row.add(c.run.steps).add(c.run.final_dist_sq);
    w.row(row);
  }
}

struct CostRow {
  Method method;
  long iters = 0;  // steps actually taken
  long grad_evals = 0, jvp_evals = 0, linear_solves = 0;
  std::string note;
};

// Oracle-call totals over `iters` steps from `start`.
inline std::vector<CostRow> cost_table(const std::vector<Method>& methods, const Game& game,
                                       long iters, const OptimizerConfig& cfg,
                                       const JointState& start) {
  std::vector<CostRow> rows;
  for (Method m : methods) {
    CostRow row;
    row.method = m;
    Stepper stepper(m, game, cfg);
    JointState s = start;
    try {
      for (long k = 0; k < iters; ++k) {
        auto rec = stepper.step(s);
        row.grad_evals += rec.grad_evals;
        row.jvp_evals += rec.jvp_evals;
        row.linear_solves += rec.linear_solves;
        s = std::move(rec.state);
        ++row.iters;
      }
    } catch (const Error& e) {
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_cost_csv(std::ostream& out, const std::vector<CostRow>& rows) {
  CsvWriter w(out, {"method", "iters", "grad_evals", "jvp_evals", "linear_solves",
                    "grad_per_step", "jvp_per_step", "solves_per_step"});
  for (const auto& r : rows) {
    const double n = r.iters > 0 ? static_cast<double>(r.iters) : std::nan("");
    w.row(CsvRow()
              .add(to_string(r.method)).add(r.iters).add(r.grad_evals).add(r.jvp_evals)
              .add(r.linear_solves).add(r.grad_evals / n).add(r.jvp_evals / n)
              .add(r.linear_solves / n));
  }
}

struct RateValidation {
  double fitted = 0.0;         // per-step factor of Delta_t over [fit_from, fit_to]
  double predicted = 0.0;      // squared spectral radius of the LEAD operator
  std::vector<double> log_delta;  // log Delta_t for t = 0..fit_to
};

// Iterates LEAD on x^T A y and fits the contraction of
// Delta_t = |w_{t+1}|^2 + |w_t|^2. The map is linear, so the state is
// rescaled whenever it gets small and the scale is carried in log space.
inline RateValidation rate_validation(const Mat& a, double eta, double beta, double alpha,
                                      long fit_from, long fit_to, const JointState& start) {
  if (fit_from < 0 || fit_to <= fit_from) throw ConfigError("rate fit window is empty");
  const Game game = Game::bilinear(a);
  OptimizerConfig cfg;
  cfg.eta = eta;
  cfg.beta = beta;
  cfg.alpha = alpha;
  RateValidation out;
  out.predicted = lead_spectrum(a, eta, beta, alpha).predicted_rate;
  JointState s = start;
  double log_scale = 0.0;
  auto rescale = [&] {
    const double n = std::sqrt(s.dist_sq() + s.x_prev.squaredNorm() + s.y_prev.squaredNorm());
    if (n > 1e-100 && n < 1e100) return;
    if (!(n > 0.0)) throw NumericError("rate validation state collapsed to zero");
    s.x /= n; s.y /= n; s.x_prev /= n; s.y_prev /= n;
    log_scale += std::log(n);
  };
  for (long t = 0; t <= fit_to; ++t) {
    const auto next = lead_step(game, s, cfg).state;
    const double delta = next.dist_sq() + s.dist_sq();
    out.log_delta.push_back(std::log(delta) + 2.0 * log_scale);
    s = next;
    rescale();
  }
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long t = fit_from; t <= fit_to; ++t) {
    const double x = static_cast<double>(t), y = out.log_delta[static_cast<std::size_t>(t)];
    n += 1; sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  out.fitted = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  return out;
}

// Distance between one symplectic LEAD step and the RK4 flow over time
// delta, compared on positions. The LEAD history is seeded from the flow
// velocity: w_prev = w - delta v.
inline double discretization_error(const Game& game, const FlowState& s0, double mu, double q,
                                   double delta, long rk4_substeps = 200) {
  OptimizerConfig cfg;
  cfg.physical = PhysicalParams{mu, q, delta};
  JointState js = JointState::at(s0.x, s0.y);
  js.x_prev = s0.x - delta * s0.vx;
  js.y_prev = s0.y - delta * s0.vy;
  const auto lead = lead_step(game, js, cfg).state;
  const auto flow = rk4_integrate(game, s0, mu, q, delta / static_cast<double>(rk4_substeps),
                                  rk4_substeps).back();
  return std::sqrt((lead.x - flow.x).squaredNorm() + (lead.y - flow.y).squaredNorm());
}

struct LyapunovRun {
  EnergyTrace trace;
  DecayReport report;
  double rate_or_rho = 0.0;
  double q = 0.0;
  double floor_constant = 1.0;            // dist_sq <= bound / floor_constant
  std::vector<std::size_t> distance_violations;
  bool valid = true;                      // discrete step-size condition
};

// iLEAD on the scalar quadratic game with the discrete energy. q defaults to
// sqrt5 (2 + mu^2)/mu.
inline LyapunovRun discrete_lyapunov_run(double h, double mu, double delta, std::optional<double> q,
                                         long steps, double x0 = 1.0, double y0 = 1.0) {
  const auto bound = discrete_rate_bound(h, mu, delta);
  LyapunovRun run;
  run.q = q.value_or(bound.q);
  run.rate_or_rho = bound.rate;
  // The energy's own (x^2 + y^2) coefficient; see discrete_energy_quadratic.
  run.floor_constant = 2.0 * std::sqrt(5.0) + 4.0 * h;
  run.valid = bound.valid;
  const Game game = Game::quadratic_scalar(h);
  OptimizerConfig cfg;
  cfg.physical = PhysicalParams{mu, run.q, delta};
  JointState s = JointState::at(Vec::Constant(1, x0), Vec::Constant(1, y0));
  run.trace.push(0, discrete_energy_quadratic(h, s, mu, delta), s.dist_sq());
  for (long k = 1; k <= steps; ++k) {
    s = ilead_step(game, s, cfg).state;
    run.trace.push(static_cast<double>(k), discrete_energy_quadratic(h, s, mu, delta), s.dist_sq());
  }
  attach_bound(run.trace, run.rate_or_rho, DecayMode::Discrete);
  run.report = verify_decay(run.trace, run.rate_or_rho, DecayMode::Discrete);
  run.distance_violations = floor_violations(run.trace.dist_sq, run.trace.bound_curve, run.floor_constant);
  return run;
}

// RK4 on x^T A y with the continuous energy. q defaults to 2/mu + mu; the
// distance bound is (E_0 / sigma_min^2) exp(-rho t) times `slack`.
inline LyapunovRun continuous_lyapunov_run(const Mat& a, double mu, std::optional<double> q,
                                           double dt, long steps, const Vec& x0, const Vec& y0,
                                           long record_every = 1, double slack = 1.05) {
  const auto bound = continuous_rate_bound_bilinear(a, mu);
  LyapunovRun run;
  run.q = q.value_or(bound.q);
  run.rate_or_rho = bound.rho;
  const double smin = singular_values(a).minCoeff();
  if (!(smin > 0.0)) throw NumericError("distance bound needs a nonsingular coupling matrix");
  run.floor_constant = smin * smin;
  const Game game = Game::bilinear(a);
  const auto traj = rk4_integrate(game, FlowState::at_rest(x0, y0), mu, run.q, dt, steps,
                                  ChargeConvention::SingleQ, record_every);
  for (const auto& s : traj) {
    run.trace.push(s.t, continuous_energy_bilinear(a, s, mu),
                   s.x.squaredNorm() + s.y.squaredNorm());
  }
  attach_bound(run.trace, run.rate_or_rho, DecayMode::Continuous);
  run.report = verify_decay(run.trace, run.rate_or_rho, DecayMode::Continuous);
  run.distance_violations =
      floor_violations(run.trace.dist_sq, run.trace.bound_curve, run.floor_constant, slack);
  return run;
}

inline void write_lyapunov_csv(std::ostream& out, const LyapunovRun& run) {
  CsvWriter w(out, {"k_or_t", "energy", "dist_sq", "bound", "violation_flag"});
  std::vector<bool> flag(run.trace.size(), false);
  for (auto i : run.report.monotonicity_violations) flag[i] = true;
  for (auto i : run.report.bound_violations) flag[i] = true;
  for (auto i : run.distance_violations) flag[i] = true;
  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    w.row(CsvRow()
              .add(run.trace.times_or_iters[i]).add(run.trace.energy[i]).add(run.trace.dist_sq[i])
              .add(run.trace.bound_curve[i]).add(flag[i] ? 1 : 0));
  }
  w.comment("rate=" + format_double(run.rate_or_rho) + " q=" + format_double(run.q) +
            " monotonicity_violations=" + std::to_string(run.report.monotonicity_violations.size()) +
            " bound_violations=" + std::to_string(run.report.bound_violations.size()) +
            " distance_violations=" + std::to_string(run.distance_violations.size()) +
            " fitted_rate=" + (run.report.fitted_rate ? format_double(*run.report.fitted_rate) : "undefined") +
            (run.valid ? "" : " step_condition=violated"));
}

inline void write_spectra_csv(std::ostream& out, const SpectralReport& r,
                              std::optional<double> numeric_mismatch = std::nullopt) {
  CsvWriter w(out, {"lambda_im", "mu_plus_re", "mu_plus_im", "mu_minus_re", "mu_minus_im", "radius"});
  for (const auto& p : r.per_lambda) {
    w.row(CsvRow()
              .add(p.lambda.imag()).add(p.mu_plus.real()).add(p.mu_plus.imag())
              .add(p.mu_minus.real()).add(p.mu_minus.imag())
              .add(std::max(std::abs(p.mu_plus), std::abs(p.mu_minus))));
  }
  std::string summary = "spectral_radius=" + format_double(r.spectral_radius) +
                        " predicted_rate=" + format_double(r.predicted_rate) +
                        " converged=" + (r.converged ? "true" : "false") +
                        " eigenvalues=" + std::to_string(r.eigenvalues.size());
  if (numeric_mismatch) summary += " numeric_mismatch=" + format_double(*numeric_mismatch);
  w.comment(summary);
}

// Energy reported next to a flow sample: the bilinear energy for bilinear
// games, the scalar quadratic energy for the scalar game, empty otherwise.
inline std::optional<double> flow_energy(const Game& game, const FlowState& s, double mu) {
  if (game.kind() == GameKind::Bilinear) return continuous_energy_bilinear(game.coupling(), s, mu);
  if (game.kind() == GameKind::QuadraticScalar) {
    return continuous_energy_quadratic(game.scalar_param(), s.x[0], s.y[0], s.vx[0], s.vy[0], mu);
  }
  return std::nullopt;
}

inline void write_flow_csv(std::ostream& out, const Game& game, const std::vector<FlowState>& traj,
                           double mu) {
  std::vector<std::string> header = {"t"};
  const auto nx = game.dim_x(), ny = game.dim_y();
  for (const char* p : {"x", "y", "vx", "vy"}) {
    const auto n = (p[0] == 'x' || p[1] == 'x') ? nx : ny;
    for (Eigen::Index i = 0; i < n; ++i) header.push_back(std::string(p) + std::to_string(i));
  }
  header.emplace_back("energy");
  CsvWriter w(out, header);
  for (const auto& s : traj) {
    CsvRow row;
    row.add(s.t);
    for (const Vec* v : {&s.x, &s.y, &s.vx, &s.vy}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) row.add((*v)[i]);
    }
    if (auto e = flow_energy(game, s, mu)) row.add(*e); else row.empty();
    w.row(row);
  }
}

}  // namespace minmax
