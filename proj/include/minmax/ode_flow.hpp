#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "minmax/errors.hpp"
#include "minmax/game.hpp"

namespace minmax {

enum class Scheme { Symplectic, Implicit };

// Discrete hyperparameters of a LEAD-type update.
struct Coefficients {
  double beta = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
};

// Maps friction mu, charge q and step delta onto (beta, eta, alpha).
// Symplectic with mu * delta > 1 gives negative momentum, which is allowed.
inline Coefficients discretization_params(Scheme scheme, double mu, double q, double delta) {
  if (!(delta > 0.0)) throw NumericError("discretization step delta must be positive");
  if (scheme == Scheme::Symplectic) {
    return {1.0 - mu * delta, delta * delta, q * delta};
  }
  const double d = 1.0 + mu * delta;
  return {1.0 / d, delta * delta / d, q * delta / d};
}

// Position/velocity state of the continuous system (unit mass).
struct FlowState {
  Vec x, y, vx, vy;
  double t = 0.0;

  static FlowState at_rest(Vec x0, Vec y0) {
    FlowState s;
    s.vx = Vec::Zero(x0.size());
    s.vy = Vec::Zero(y0.size());
    s.x = std::move(x0);
    s.y = std::move(y0);
    return s;
  }
};

struct FlowDerivative {
  Vec dx, dy, dvx, dvy;
};

// Factor in front of the magnetic term. SingleQ is the bilinear-analysis
// convention (q multiplies the cross term directly); DoubleQ is the general
// equation of motion with 2q.
enum class ChargeConvention { SingleQ, DoubleQ };

//   x'' = -mu x' - grad_x f - c q (d_xy f) y'
//   y'' = -mu y' + grad_y f + c q (d_yx f) x'
inline FlowDerivative eom_rhs(const Game& game, const FlowState& s, double mu, double q,
                              ChargeConvention conv = ChargeConvention::SingleQ) {
  game.check_shapes(s.x, s.y);
  if (s.vx.size() != s.x.size() || s.vy.size() != s.y.size()) {
    throw ShapeError("flow velocity shape does not match position");
  }
  const double c = conv == ChargeConvention::SingleQ ? q : 2.0 * q;
  const auto g = game.grads(s.x, s.y);
  FlowDerivative d;
  d.dx = s.vx;
  d.dy = s.vy;
  d.dvx = -mu * s.vx - g.gx - c * game.jvp(Block::XY, s.vy);
  d.dvy = -mu * s.vy + g.gy + c * game.jvp(Block::YX, s.vx);
  return d;
}

namespace detail {

inline FlowState advance(const FlowState& s, const FlowDerivative& d, double h) {
  FlowState out;
  out.x = s.x + h * d.dx;
  out.y = s.y + h * d.dy;
  out.vx = s.vx + h * d.dvx;
  out.vy = s.vy + h * d.dvy;
  out.t = s.t + h;
  return out;
}

inline bool finite(const FlowState& s) {
  return s.x.allFinite() && s.y.allFinite() && s.vx.allFinite() && s.vy.allFinite();
}

}  // namespace detail

// One classical RK4 step of size dt.
inline FlowState rk4_step(const Game& game, const FlowState& s, double mu, double q, double dt,
                          ChargeConvention conv = ChargeConvention::SingleQ) {
  const auto k1 = eom_rhs(game, s, mu, q, conv);
  const auto k2 = eom_rhs(game, detail::advance(s, k1, 0.5 * dt), mu, q, conv);
  const auto k3 = eom_rhs(game, detail::advance(s, k2, 0.5 * dt), mu, q, conv);
  const auto k4 = eom_rhs(game, detail::advance(s, k3, dt), mu, q, conv);
  FlowState out;
  out.x = s.x + (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.y = s.y + (dt / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  out.vx = s.vx + (dt / 6.0) * (k1.dvx + 2.0 * k2.dvx + 2.0 * k3.dvx + k4.dvx);
  out.vy = s.vy + (dt / 6.0) * (k1.dvy + 2.0 * k2.dvy + 2.0 * k3.dvy + k4.dvy);
  out.t = s.t + dt;
  return out;
}

// Integrates `steps` RK4 steps. The returned trajectory holds s0 followed by
// every `record_every`-th state; the final state is always included.
inline std::vector<FlowState> rk4_integrate(const Game& game, const FlowState& s0, double mu,
                                            double q, double dt, long steps,
                                            ChargeConvention conv = ChargeConvention::SingleQ,
                                            long record_every = 1) {
  if (!(dt > 0.0)) throw NumericError("rk4 step dt must be positive");
  if (steps < 0) throw NumericError("rk4 step count must be non-negative");
  if (record_every < 1) record_every = 1;
  std::vector<FlowState> traj;
  traj.reserve(static_cast<std::size_t>(steps / record_every + 2));
  traj.push_back(s0);
  FlowState s = s0;
  for (long i = 1; i <= steps; ++i) {
    s = rk4_step(game, s, mu, q, dt, conv);
    if (!detail::finite(s)) {
      throw NumericError("rk4 produced a non-finite state at step " + std::to_string(i));
    }
    // Keep the recorded time exact rather than accumulated.
    s.t = s0.t + static_cast<double>(i) * dt;
    if (i % record_every == 0 || i == steps) traj.push_back(s);
  }
  return traj;
}

}  // namespace minmax
