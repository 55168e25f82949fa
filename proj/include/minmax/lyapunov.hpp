#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "minmax/errors.hpp"
#include "minmax/game.hpp"
#include "minmax/ode_flow.hpp"
#include "minmax/spectral.hpp"

namespace minmax {

// Continuous energy for x^T A y:
//   E = 1/2 |x' + mu x + mu A y|^2 + 1/2 |y' + mu y - mu A^T x|^2
//     + 1/2 (|x'|^2 + |y'|^2) + x^T A A^T x + y^T A^T A y
inline double continuous_energy_bilinear(const Mat& a, const Vec& x, const Vec& y, const Vec& vx,
                                         const Vec& vy, double mu) {
  if (a.rows() != x.size() || a.cols() != y.size() || vx.size() != x.size() ||
      vy.size() != y.size()) {
    throw ShapeError("energy arguments do not match the coupling matrix");
  }
  const Vec aty = a * y;
  const Vec atx = a.transpose() * x;
  const Vec px = vx + mu * x + mu * aty;
  const Vec py = vy + mu * y - mu * atx;
  return 0.5 * px.squaredNorm() + 0.5 * py.squaredNorm() +
         0.5 * (vx.squaredNorm() + vy.squaredNorm()) + atx.squaredNorm() + aty.squaredNorm();
}

inline double continuous_energy_bilinear(const Mat& a, const FlowState& s, double mu) {
  return continuous_energy_bilinear(a, s.x, s.y, s.vx, s.vy, mu);
}

// Exact time derivative of the bilinear energy along the flow with
// q = 2/mu + mu.
inline double continuous_energy_rate_bilinear(const Mat& a, const FlowState& s, double mu) {
  return -mu * ((a.transpose() * s.x).squaredNorm() + (a * s.y).squaredNorm() +
                s.vx.squaredNorm() + s.vy.squaredNorm());
}

struct ContinuousBound {
  double rho;
  double q;
};

// q = 2/mu + mu and the decay rate
//   rho = min_j min{ mu/(1+mu), 2 mu s_j^2 / ((1+s_j^2)(mu^2+mu) + 2 s_j^2) }.
inline ContinuousBound continuous_rate_bound_bilinear(const Mat& a, double mu) {
  if (!(mu > 0.0)) throw NumericError("continuous rate bound needs mu > 0");
  const Vec s = singular_values(a);
  if (!(s.maxCoeff() > 0.0)) throw NumericError("continuous rate bound needs a nonzero matrix");
  double rho = mu / (1.0 + mu);
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double s2 = s[j] * s[j];
    rho = std::min(rho, 2.0 * mu * s2 / ((1.0 + s2) * (mu * mu + mu) + 2.0 * s2));
  }
  return {rho, 2.0 / mu + mu};
}

// Scalar quadratic game, q = (2 + mu^2)/mu:
//   E = 1/2 (x' + mu x + mu y)^2 + 1/2 (y' + mu y - mu x)^2
//     + 1/2 (x'^2 + y'^2) + (1 + h)(x^2 + y^2)
inline double continuous_energy_quadratic(double h, double x, double y, double vx, double vy,
                                          double mu) {
  const double px = vx + mu * x + mu * y;
  const double py = vy + mu * y - mu * x;
  return 0.5 * px * px + 0.5 * py * py + 0.5 * (vx * vx + vy * vy) + (1.0 + h) * (x * x + y * y);
}

inline ContinuousBound continuous_rate_bound_quadratic(double h, double mu) {
  if (!(mu > 0.0)) throw NumericError("continuous rate bound needs mu > 0");
  const double rho = std::min(mu * (1.0 + h) / (mu * mu + mu + 1.0 + h), mu / (1.0 + mu));
  return {rho, (2.0 + mu * mu) / mu};
}

// Discrete energy of iLEAD on the scalar quadratic game, c = 2 sqrt(sqrt5/3):
//   E = 1/2 (vx + c x/mu + c y/mu)^2 + 1/2 (vy + c y/mu - c x/mu)^2
//     + 1/2 (vx^2 + vy^2) + 2 sqrt5 (1 + 2h/sqrt5)(x^2 + y^2)
inline double discrete_energy_quadratic(double h, double x, double y, double vx, double vy,
                                        double mu) {
  if (mu == 0.0) throw NumericError("discrete energy divides by mu; mu must be nonzero");
  const double s5 = std::sqrt(5.0);
  const double c = 2.0 * std::sqrt(s5 / 3.0);
  const double px = vx + c * x / mu + c * y / mu;
  const double py = vy + c * y / mu - c * x / mu;
  return 0.5 * px * px + 0.5 * py * py + 0.5 * (vx * vx + vy * vy) +
         2.0 * s5 * (1.0 + 2.0 * h / s5) * (x * x + y * y);
}

// Velocities are reconstructed from iterates: v_k = (w_k - w_{k-1}) / delta.
inline double discrete_energy_quadratic(double h, const JointState& s, double mu, double delta) {
  if (s.x.size() != 1 || s.y.size() != 1) throw ShapeError("discrete energy is for scalar games");
  return discrete_energy_quadratic(h, s.x[0], s.y[0], s.dx()[0] / delta, s.dy()[0] / delta, mu);
}

struct DiscreteBound {
  double rate;   // per-step energy contraction C / (C + delta mu)
  double q;      // sqrt5 (2 + mu^2) / mu
  double c;      // mu^2 (2 sqrt5 + 4h) + 4 sqrt5
  bool valid;    // mu delta >= 1
};

inline DiscreteBound discrete_rate_bound(double h, double mu, double delta) {
  if (!(mu > 0.0) || !(delta > 0.0)) throw NumericError("discrete rate bound needs mu, delta > 0");
  const double s5 = std::sqrt(5.0);
  const double c = mu * mu * (2.0 * s5 + 4.0 * h) + 4.0 * s5;
  return {c / (c + delta * mu), s5 * (2.0 + mu * mu) / mu, c, mu * delta >= 1.0};
}

enum class DecayMode { Discrete, Continuous };

struct EnergyTrace {
  std::vector<double> times_or_iters;
  std::vector<double> energy;
  std::vector<double> dist_sq;
  std::vector<double> bound_curve;  // empty when no bound is attached

  void push(double t, double e, double d) {
    times_or_iters.push_back(t);
    energy.push_back(e);
    dist_sq.push_back(d);
  }
  std::size_t size() const { return energy.size(); }
};

// Fills bound_curve with E_0 rate^k (discrete) or E_0 exp(-rho t).
inline void attach_bound(EnergyTrace& trace, double rate_or_rho, DecayMode mode) {
  trace.bound_curve.clear();
  if (trace.energy.empty()) return;
  const double e0 = trace.energy.front();
  const double t0 = trace.times_or_iters.front();
  for (double t : trace.times_or_iters) {
    const double dt = t - t0;
    trace.bound_curve.push_back(mode == DecayMode::Discrete ? e0 * std::pow(rate_or_rho, dt)
                                                            : e0 * std::exp(-rate_or_rho * dt));
  }
}

struct DecayReport {
  std::vector<std::size_t> monotonicity_violations;  // indices i+1 with E[i+1] > E[i]
  std::vector<std::size_t> bound_violations;
  std::optional<double> fitted_rate;  // unset when fewer than two positive energies
  double worst_bound_ratio = 0.0;     // max E[i] / bound[i]
};

inline constexpr double kMonotoneSlack = 1e-12;

// Monotone decay, bound compliance and the least-squares rate of log E.
// Discrete mode fits the per-step factor exp(slope); continuous mode fits
// rho = -slope.
inline DecayReport verify_decay(const EnergyTrace& trace, double rate_or_rho, DecayMode mode) {
  if (trace.energy.empty()) throw NumericError("verify_decay needs a nonempty trace");
  if (trace.times_or_iters.size() != trace.energy.size()) {
    throw ShapeError("trace times and energies differ in length");
  }
  DecayReport r;
  const auto& e = trace.energy;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (e[i + 1] > e[i] + kMonotoneSlack * std::max(std::abs(e[i]), 0.0)) {
      r.monotonicity_violations.push_back(i + 1);
    }
  }
  const double e0 = e.front();
  const double t0 = trace.times_or_iters.front();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double dt = trace.times_or_iters[i] - t0;
    const double bound = mode == DecayMode::Discrete ? e0 * std::pow(rate_or_rho, dt)
                                                     : e0 * std::exp(-rate_or_rho * dt);
    if (e[i] > bound * (1.0 + kMonotoneSlack)) r.bound_violations.push_back(i);
    if (bound > 0.0) r.worst_bound_ratio = std::max(r.worst_bound_ratio, e[i] / bound);
  }

  double n = 0, st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(e[i] > 0.0) || !std::isfinite(e[i])) continue;
    const double t = trace.times_or_iters[i];
    const double l = std::log(e[i]);
    n += 1;
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
  }
  const double den = n * stt - st * st;
  if (n >= 2 && den > 0.0) {
    const double slope = (n * stl - st * sl) / den;
    r.fitted_rate = mode == DecayMode::Discrete ? std::exp(slope) : -slope;
  }
  return r;
}

// Indices where dist_sq exceeds (energy / floor) times `slack`. With the
// energy itself on the right this is the per-sample floor invariant; pass a
// bound curve to check the distance bound instead.
inline std::vector<std::size_t> floor_violations(const std::vector<double>& dist_sq,
                                                 const std::vector<double>& energy_or_bound,
                                                 double floor_constant, double slack = 1.0) {
  if (!(floor_constant > 0.0)) throw NumericError("floor constant must be positive");
  if (dist_sq.size() != energy_or_bound.size()) throw ShapeError("trace lengths differ");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dist_sq.size(); ++i) {
    if (dist_sq[i] > energy_or_bound[i] / floor_constant * slack) out.push_back(i);
  }
  return out;
}

}  // namespace minmax
