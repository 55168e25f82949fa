#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/LU>

#include "minmax/errors.hpp"
#include "minmax/game.hpp"
#include "minmax/ode_flow.hpp"

namespace minmax {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct PhysicalParams {
  double mu = 0.0;     // friction
  double q = 0.0;      // charge coupling
  double delta = 0.1;  // discretization step
};

// Hyperparameter bundle. When `physical` is set it is the source of truth and
// (beta, eta, alpha) are derived from it for the scheme of the method.
struct OptimizerConfig {
  double eta = 0.01;
  double beta = 0.0;
  double alpha = 0.0;
  double gamma_reg = 0.0;
  std::optional<double> alpha_x, alpha_y;
  AdamParams adam;
  std::optional<PhysicalParams> physical;

  Coefficients coefficients(Scheme scheme) const {
    if (physical) return discretization_params(scheme, physical->mu, physical->q, physical->delta);
    return {beta, eta, alpha};
  }
  double coupling_x() const { return alpha_x.value_or(alpha); }
  double coupling_y() const { return alpha_y.value_or(alpha); }

  void validate() const {
    if (physical) {
      if (!(physical->delta > 0.0)) throw ConfigError("delta must be positive");
      if (!(physical->mu >= 0.0)) throw ConfigError("mu must be non-negative");
    } else if (!(eta > 0.0)) {
      throw ConfigError("eta must be positive");
    }
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
      throw ConfigError("adam beta1 and beta2 must lie in [0, 1)");
    }
    if (!(adam.eps > 0.0)) throw ConfigError("adam eps must be positive");
  }
};

struct StepRecord {
  JointState state;
  long grad_evals = 0;
  long jvp_evals = 0;
  long linear_solves = 0;
};

enum class Method {
  GDA,
  MomentumGDA,
  NegativeMomentumGDA,
  OGDA,
  ExtraGradient,
  SGA,
  CO,
  CGD,
  LOLA,
  LEAD,
  iLEAD,
  LEADAdam,
};

inline constexpr std::array<Method, 12> kAllMethods = {
    Method::GDA, Method::MomentumGDA, Method::NegativeMomentumGDA, Method::OGDA,
    Method::ExtraGradient, Method::SGA, Method::CO, Method::CGD,
    Method::LOLA, Method::LEAD, Method::iLEAD, Method::LEADAdam};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::GDA: return "GDA";
    case Method::MomentumGDA: return "MomentumGDA";
    case Method::NegativeMomentumGDA: return "NegativeMomentumGDA";
    case Method::OGDA: return "OGDA";
    case Method::ExtraGradient: return "ExtraGradient";
    case Method::SGA: return "SGA";
    case Method::CO: return "CO";
    case Method::CGD: return "CGD";
    case Method::LOLA: return "LOLA";
    case Method::LEAD: return "LEAD";
    case Method::iLEAD: return "iLEAD";
    case Method::LEADAdam: return "LEADAdam";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const auto key = lower(name);
  for (Method m : kAllMethods) {
    if (lower(to_string(m)) == key) return m;
  }
  throw CapabilityError("unknown method '" + std::string(name) + "'");
}

enum class HyperParam { Eta, Beta, Alpha, GammaReg };

// The hyperparameters a method actually reads (what a sweep should vary).
inline std::vector<HyperParam> method_hyperparameters(Method m) {
  using H = HyperParam;
  switch (m) {
    case Method::GDA:
    case Method::OGDA:
    case Method::CGD: return {H::Eta};
    case Method::MomentumGDA:
    case Method::NegativeMomentumGDA:
    case Method::ExtraGradient: return {H::Eta, H::Beta};
    case Method::SGA:
    case Method::CO: return {H::Eta, H::GammaReg};
    case Method::LOLA:
    case Method::LEADAdam: return {H::Eta, H::Alpha};
    case Method::LEAD:
    case Method::iLEAD: return {H::Eta, H::Beta, H::Alpha};
  }
  return {H::Eta};
}

// Wraps a game and tallies oracle usage. grads() counts two gradient-block
// evaluations (one per player).
class CountingOracle {
 public:
  explicit CountingOracle(const Game& game) : game_(game) {}

  Gradients grads(const Vec& x, const Vec& y) {
    grad_evals_ += 2;
    return game_.grads(x, y);
  }
  Vec grad_x(const Vec& x, const Vec& y) {
    grad_evals_ += 1;
    return game_.grads(x, y).gx;
  }
  Vec grad_y(const Vec& x, const Vec& y) {
    grad_evals_ += 1;
    return game_.grads(x, y).gy;
  }
  Vec jvp(Block b, const Vec& v) {
    jvp_evals_ += 1;
    return game_.jvp(b, v);
  }
  // Materializes a block column by column through jvp calls.
  Mat block_matrix(Block b) {
    const bool x_in = b == Block::YX || b == Block::XX;
    const bool x_out = b == Block::XY || b == Block::XX;
    const auto in = x_in ? game_.dim_x() : game_.dim_y();
    const auto out = x_out ? game_.dim_x() : game_.dim_y();
    Mat m(out, in);
    Vec e = Vec::Zero(in);
    for (Eigen::Index j = 0; j < in; ++j) {
      e[j] = 1.0;
      m.col(j) = jvp(b, e);
      e[j] = 0.0;
    }
    return m;
  }
  Vec solve(const Mat& m, const Vec& rhs) {
    linear_solves_ += 1;
    Eigen::PartialPivLU<Mat> lu(m);
    const double rc = lu.rcond();
    if (!(rc > 1e-13)) {
      throw SolverError("linear system is singular to working precision (rcond estimate " +
                            std::to_string(rc) + ")",
                        rc);
    }
    return lu.solve(rhs);
  }

  const Game& game() const { return game_; }

  StepRecord finish(JointState s) const { return {std::move(s), grad_evals_, jvp_evals_, linear_solves_}; }

 private:
  const Game& game_;
  long grad_evals_ = 0;
  long jvp_evals_ = 0;
  long linear_solves_ = 0;
};

namespace detail {

inline void check_input(const Game& game, const JointState& s) {
  game.check_shapes(s.x, s.y);
  game.check_shapes(s.x_prev, s.y_prev);
  if (!s.x.allFinite() || !s.y.allFinite() || !s.x_prev.allFinite() || !s.y_prev.allFinite()) {
    throw NumericError("non-finite value in input state at iteration " + std::to_string(s.k));
  }
}

// Shifts the history and guards against NaN/Inf.
inline JointState advance(const JointState& s, Vec x_next, Vec y_next) {
  if (!x_next.allFinite() || !y_next.allFinite()) {
    throw NumericError("non-finite state produced at iteration " + std::to_string(s.k + 1));
  }
  JointState out;
  out.x_prev = s.x;
  out.y_prev = s.y;
  out.x = std::move(x_next);
  out.y = std::move(y_next);
  out.k = s.k + 1;
  return out;
}

}  // namespace detail

// Explicit LEAD step (simultaneous):
//   x+ = x + beta dx - eta grad_x f - alpha (d_xy f) dy
//   y+ = y + beta dy + eta grad_y f + alpha (d_yx f) dx
inline StepRecord lead_step(const Game& game, const JointState& s, const OptimizerConfig& cfg) {
  detail::check_input(game, s);
  const auto c = cfg.coefficients(Scheme::Symplectic);
  CountingOracle oracle(game);
  const auto g = oracle.grads(s.x, s.y);
  const Vec dx = s.dx(), dy = s.dy();
  const Vec couple_x = oracle.jvp(Block::XY, dy);
  const Vec couple_y = oracle.jvp(Block::YX, dx);
  Vec x_next = s.x + c.beta * dx - c.eta * g.gx - c.alpha * couple_x;
  Vec y_next = s.y + c.beta * dy + c.eta * g.gy + c.alpha * couple_y;
  return oracle.finish(detail::advance(s, std::move(x_next), std::move(y_next)));
}

// Implicit LEAD: gradients and coupling are evaluated at the new iterate,
// which for quadratic games is one linear solve in (x+, y+):
//   x+ = x + beta dx - eta grad_x f(x+, y+) - alpha (d_xy f)(y+ - y)
//   y+ = y + beta dy + eta grad_y f(x+, y+) + alpha (d_yx f)(x+ - x)
inline StepRecord ilead_step(const Game& game, const JointState& s, const OptimizerConfig& cfg) {
  if (game.kind() == GameKind::ScaledSeparable) {
    throw CapabilityError("iLEAD supports bilinear and quadratic games only");
  }
  detail::check_input(game, s);
  const auto c = cfg.coefficients(Scheme::Implicit);
  CountingOracle oracle(game);
  const Mat hxx = oracle.block_matrix(Block::XX);
  const Mat hxy = oracle.block_matrix(Block::XY);
  const Mat hyx = oracle.block_matrix(Block::YX);
  const Mat hyy = oracle.block_matrix(Block::YY);
  const auto nx = game.dim_x(), ny = game.dim_y();

  Mat system(nx + ny, nx + ny);
  system.topLeftCorner(nx, nx) = Mat::Identity(nx, nx) + c.eta * hxx;
  system.topRightCorner(nx, ny) = (c.eta + c.alpha) * hxy;
  system.bottomLeftCorner(ny, nx) = -(c.eta + c.alpha) * hyx;
  system.bottomRightCorner(ny, ny) = Mat::Identity(ny, ny) - c.eta * hyy;
  Vec rhs(nx + ny);
  rhs << s.x + c.beta * s.dx() + c.alpha * (hxy * s.y),
      s.y + c.beta * s.dy() - c.alpha * (hyx * s.x);

  const Vec sol = oracle.solve(system, rhs);
  return oracle.finish(detail::advance(s, sol.head(nx), sol.tail(ny)));
}

// First and second moment buffers of LEAD-Adam, one set per player, with the
// shared step counter.
struct AdamState {
  Vec m_x, v_x, m_y, v_y;
  std::uint64_t t = 0;

  static AdamState zeros(const Game& game) {
    return {Vec::Zero(game.dim_x()), Vec::Zero(game.dim_x()), Vec::Zero(game.dim_y()),
            Vec::Zero(game.dim_y()), 0};
  }
};

struct AdamStepResult {
  StepRecord record;
  AdamState moments;
};

// LEAD-Adam. Alternating: the y player sees the already-updated x.
inline AdamStepResult lead_adam_step(const Game& game, const JointState& s, const AdamState& adam,
                                     const OptimizerConfig& cfg) {
  detail::check_input(game, s);
  if (adam.m_x.size() != game.dim_x() || adam.v_x.size() != game.dim_x() ||
      adam.m_y.size() != game.dim_y() || adam.v_y.size() != game.dim_y()) {
    throw ShapeError("adam moment buffers do not match game");
  }
  if (adam.t == std::numeric_limits<std::uint64_t>::max()) {
    throw NumericError("adam step counter overflow");
  }
  const auto& p = cfg.adam;
  const double eta = cfg.eta;
  CountingOracle oracle(game);
  AdamState next = adam;
  next.t = adam.t + 1;
  const double t = static_cast<double>(next.t);
  const double bc1 = 1.0 - std::pow(p.beta1, t);
  const double bc2 = 1.0 - std::pow(p.beta2, t);

  const Vec gx = oracle.grad_x(s.x, s.y) + cfg.coupling_x() * oracle.jvp(Block::XY, s.dy());
  next.m_x = p.beta1 * adam.m_x + (1.0 - p.beta1) * gx;
  next.v_x = p.beta2 * adam.v_x + (1.0 - p.beta2) * gx.cwiseAbs2();
  const Vec x_next =
      s.x - eta * ((next.m_x / bc1).array() / ((next.v_x / bc2).array().sqrt() + p.eps)).matrix();

  const Vec gy =
      oracle.grad_y(x_next, s.y) + cfg.coupling_y() * oracle.jvp(Block::YX, Vec(x_next - s.x));
  next.m_y = p.beta1 * adam.m_y + (1.0 - p.beta1) * gy;
  next.v_y = p.beta2 * adam.v_y + (1.0 - p.beta2) * gy.cwiseAbs2();
  const Vec y_next =
      s.y + eta * ((next.m_y / bc1).array() / ((next.v_y / bc2).array().sqrt() + p.eps)).matrix();

  if (!next.m_x.allFinite() || !next.v_x.allFinite() || !next.m_y.allFinite() ||
      !next.v_y.allFinite()) {
    throw NumericError("non-finite adam moments at step " + std::to_string(next.t));
  }
  return {oracle.finish(detail::advance(s, x_next, y_next)), std::move(next)};
}

// Baseline update rules, all simultaneous. The y player's interaction terms
// mirror the x player's for the zero-sum objective.
inline StepRecord baseline_step(Method method, const Game& game, const JointState& s,
                                const OptimizerConfig& cfg) {
  detail::check_input(game, s);
  CountingOracle oracle(game);
  const double eta = cfg.eta;
  Vec x_next, y_next;
  switch (method) {
    case Method::GDA: {
      const auto g = oracle.grads(s.x, s.y);
      x_next = s.x - eta * g.gx;
      y_next = s.y + eta * g.gy;
      break;
    }
    case Method::MomentumGDA:
    case Method::NegativeMomentumGDA: {
      const double beta = method == Method::MomentumGDA ? cfg.beta : -std::abs(cfg.beta);
      const auto g = oracle.grads(s.x, s.y);
      x_next = s.x + beta * s.dx() - eta * g.gx;
      y_next = s.y + beta * s.dy() + eta * g.gy;
      break;
    }
    case Method::OGDA: {
      // With no history (x_prev == x) the stale gradient equals the current one.
      const auto g = oracle.grads(s.x, s.y);
      const auto g_prev = oracle.grads(s.x_prev, s.y_prev);
      x_next = s.x - eta * (2.0 * g.gx - g_prev.gx);
      y_next = s.y + eta * (2.0 * g.gy - g_prev.gy);
      break;
    }
    case Method::ExtraGradient: {
      // beta = 0 is plain extra-gradient.
      const auto g = oracle.grads(s.x, s.y);
      const Vec x_half = s.x - eta * g.gx;
      const Vec y_half = s.y + eta * g.gy;
      const auto gh = oracle.grads(x_half, y_half);
      x_next = s.x + cfg.beta * s.dx() - eta * gh.gx;
      y_next = s.y + cfg.beta * s.dy() + eta * gh.gy;
      break;
    }
    case Method::SGA: {
      const auto g = oracle.grads(s.x, s.y);
      const double eg = eta * cfg.gamma_reg;
      x_next = s.x - eta * g.gx - eg * oracle.jvp(Block::XY, g.gy);
      y_next = s.y + eta * g.gy - eg * oracle.jvp(Block::YX, g.gx);
      break;
    }
    case Method::CO: {
      const auto g = oracle.grads(s.x, s.y);
      const double eg = eta * cfg.gamma_reg;
      const Vec ix = oracle.jvp(Block::XY, g.gy) + oracle.jvp(Block::XX, g.gx);
      const Vec iy = oracle.jvp(Block::YX, g.gx) + oracle.jvp(Block::YY, g.gy);
      x_next = s.x - eta * g.gx - eg * ix;
      y_next = s.y + eta * g.gy - eg * iy;
      break;
    }
    case Method::CGD: {
      const auto g = oracle.grads(s.x, s.y);
      const Mat hxy = oracle.block_matrix(Block::XY);
      const Mat hyx = oracle.block_matrix(Block::YX);
      const double e2 = eta * eta;
      const Mat cx = Mat::Identity(game.dim_x(), game.dim_x()) + e2 * hxy * hyx;
      const Mat cy = Mat::Identity(game.dim_y(), game.dim_y()) + e2 * hyx * hxy;
      const Vec rx = -eta * g.gx - e2 * oracle.jvp(Block::XY, g.gy);
      const Vec ry = eta * g.gy - e2 * oracle.jvp(Block::YX, g.gx);
      x_next = s.x + oracle.solve(cx, rx);
      y_next = s.y + oracle.solve(cy, ry);
      break;
    }
    case Method::LOLA: {
      const auto g = oracle.grads(s.x, s.y);
      const double ea = 2.0 * eta * cfg.alpha;
      x_next = s.x - eta * g.gx - ea * oracle.jvp(Block::XY, g.gy);
      y_next = s.y + eta * g.gy - ea * oracle.jvp(Block::YX, g.gx);
      break;
    }
    case Method::LEAD:
      return lead_step(game, s, cfg);
    case Method::iLEAD:
      return ilead_step(game, s, cfg);
    case Method::LEADAdam:
      throw CapabilityError("LEADAdam carries moment buffers; use lead_adam_step or Stepper");
  }
  return oracle.finish(detail::advance(s, std::move(x_next), std::move(y_next)));
}

// Per-trajectory stepping for any method; owns the Adam buffers when needed.
class Stepper {
 public:
  Stepper(Method method, const Game& game, OptimizerConfig cfg)
      : method_(method), game_(game), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (method_ == Method::LEADAdam) adam_ = AdamState::zeros(game_);
  }

  StepRecord step(const JointState& s) {
    if (method_ == Method::LEADAdam) {
      auto r = lead_adam_step(game_, s, *adam_, cfg_);
      adam_ = std::move(r.moments);
      return std::move(r.record);
    }
    return baseline_step(method_, game_, s, cfg_);
  }

  Method method() const { return method_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  Method method_;
  const Game& game_;
  OptimizerConfig cfg_;
  std::optional<AdamState> adam_;
};

}  // namespace minmax
