#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "minmax/experiments.hpp"
#include "minmax/lyapunov.hpp"

using namespace minmax;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
const Mat kOne = Mat::Constant(1, 1, 1.0);

}  // namespace

TEST(ContinuousEnergyBilinear, Examples) {
  EXPECT_EQ(continuous_energy_bilinear(kOne, v1(0), v1(0), v1(0), v1(0), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(continuous_energy_bilinear(kOne, v1(1), v1(0), v1(0), v1(0), 1.0), 2.0);
  const double e = continuous_energy_bilinear(kOne, v1(0.3), v1(-1), v1(2), v1(0.5), 0.7);
  EXPECT_NEAR(continuous_energy_bilinear(kOne, v1(0.6), v1(-2), v1(4), v1(1), 0.7), 4 * e, 1e-12);
  EXPECT_THROW(continuous_energy_bilinear(kOne, Vec::Ones(2), v1(0), v1(0), v1(0), 1.0), ShapeError);
}

TEST(ContinuousEnergyBilinear, UsesYVelocityInSecondTerm) {
  // Only vy is nonzero: E = 1/2 vy^2 + 1/2 vy^2.
  EXPECT_DOUBLE_EQ(continuous_energy_bilinear(kOne, v1(0), v1(0), v1(0), v1(2), 1.0), 4.0);
}

TEST(ContinuousRateBound, Examples) {
  const auto b = continuous_rate_bound_bilinear(kOne, 1.0);
  EXPECT_NEAR(b.rho, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(b.q, 3.0);
  EXPECT_LT(continuous_rate_bound_bilinear(kOne, 1e-8).rho, 1e-7);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  const double mu = 1.0;
  const double branch1 = 2 * mu * 1 / ((1 + 1) * (mu * mu + mu) + 2);
  const double branch2 = 2 * mu * 4 / ((1 + 4) * (mu * mu + mu) + 8);
  EXPECT_NEAR(continuous_rate_bound_bilinear(d, mu).rho, std::min({0.5, branch1, branch2}), 1e-15);
}

TEST(ContinuousEnergyQuadratic, Examples) {
  EXPECT_EQ(continuous_energy_quadratic(0.3, 0, 0, 0, 0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(continuous_energy_quadratic(0.0, 1, 0, 0, 0, 1.0), 2.0);
  EXPECT_GT(continuous_energy_quadratic(0.5, 0.2, -0.3, 0.1, 0, 1.0),
            continuous_energy_quadratic(0.4, 0.2, -0.3, 0.1, 0, 1.0));
}

TEST(DiscreteEnergy, Examples) {
  EXPECT_EQ(discrete_energy_quadratic(0.0, 0, 0, 0, 0, 1.0), 0.0);
  // c/mu = sqrt(sqrt5/3) at mu = 2; both squares contribute sqrt5/6.
  EXPECT_NEAR(discrete_energy_quadratic(0.0, 1, 0, 0, 0, 2.0), 7.0 * std::sqrt(5.0) / 3.0, 1e-14);
  // Large mu suppresses the squared terms, leaving the h = 0 coefficient 2 sqrt5.
  EXPECT_NEAR(discrete_energy_quadratic(0.0, 1, 0, 0, 0, 1e12), 2 * std::sqrt(5.0), 1e-9);
  EXPECT_THROW(discrete_energy_quadratic(0.0, 1, 0, 0, 0, 0.0), NumericError);
}

TEST(DiscreteRateBound, Examples) {
  const auto b = discrete_rate_bound(0.0, 1.0, 1.0);
  EXPECT_NEAR(b.c, 6 * std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(b.rate, 6 * std::sqrt(5.0) / (6 * std::sqrt(5.0) + 1), 1e-15);
  EXPECT_NEAR(b.rate, 0.930634, 1e-6);
  EXPECT_NEAR(b.q, 3 * std::sqrt(5.0), 1e-14);
  EXPECT_TRUE(b.valid);
  EXPECT_FALSE(discrete_rate_bound(0.0, 1.0, 0.5).valid);
  EXPECT_LT(discrete_rate_bound(0.0, 1.0, 1e12).rate, 1e-10);
}

TEST(VerifyDecay, ZeroTrace) {
  EnergyTrace t;
  for (int k = 0; k < 5; ++k) t.push(k, 0.0, 0.0);
  const auto r = verify_decay(t, 0.9, DecayMode::Discrete);
  EXPECT_TRUE(r.monotonicity_violations.empty());
  EXPECT_TRUE(r.bound_violations.empty());
  EXPECT_FALSE(r.fitted_rate.has_value());
}

TEST(VerifyDecay, GeometricTrace) {
  EnergyTrace t;
  for (int k = 0; k < 50; ++k) t.push(k, std::pow(0.9, k), 0.0);
  const auto r = verify_decay(t, 0.95, DecayMode::Discrete);
  EXPECT_TRUE(r.monotonicity_violations.empty());
  EXPECT_TRUE(r.bound_violations.empty());
  ASSERT_TRUE(r.fitted_rate.has_value());
  EXPECT_NEAR(*r.fitted_rate, 0.9, 1e-12);
}

TEST(VerifyDecay, SingleUptick) {
  EnergyTrace t;
  for (double e : {5.0, 4.0, 3.0, 3.5, 2.0, 1.0}) t.push(static_cast<double>(t.size()), e, 0.0);
  const auto r = verify_decay(t, 1.0, DecayMode::Discrete);
  ASSERT_EQ(r.monotonicity_violations.size(), 1u);
  EXPECT_EQ(r.monotonicity_violations[0], 3u);
}

TEST(VerifyDecay, ContinuousFit) {
  EnergyTrace t;
  for (int k = 0; k <= 100; ++k) t.push(0.1 * k, 3.0 * std::exp(-0.4 * 0.1 * k), 0.0);
  const auto r = verify_decay(t, 0.3, DecayMode::Continuous);
  EXPECT_TRUE(r.bound_violations.empty());
  EXPECT_NEAR(*r.fitted_rate, 0.4, 1e-12);
  const auto strict = verify_decay(t, 0.5, DecayMode::Continuous);
  EXPECT_FALSE(strict.bound_violations.empty());
}

TEST(Properties, EnergiesArePositive) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  Mat a(2, 2);
  a << 1, -0.5, 0.3, 2;
  for (int i = 0; i < 100000; ++i) {
    const double mu = u(rng), h = u(rng) - 0.01;
    Vec x(2), y(2), vx(2), vy(2);
    for (Vec* v : {&x, &y, &vx, &vy}) {
      for (auto& e : *v) e = n(rng);
    }
    ASSERT_GE(continuous_energy_bilinear(a, x, y, vx, vy, mu), 0.0);
    ASSERT_GE(continuous_energy_quadratic(h, x[0], y[0], vx[0], vy[0], mu), 0.0);
    ASSERT_GE(discrete_energy_quadratic(h, x[0], y[0], vx[0], vy[0], mu), 0.0);
  }
}

TEST(Properties, DiscreteEnergyDecaysAlongIlead) {
  for (double h : {0.0, 0.5, 1.0}) {
    const auto run = discrete_lyapunov_run(h, 1.0, 1.0, std::nullopt, 10000);
    EXPECT_TRUE(run.report.monotonicity_violations.empty()) << h;
    EXPECT_TRUE(run.report.bound_violations.empty()) << h;
    EXPECT_TRUE(run.distance_violations.empty()) << h;
  }
  const auto wide = discrete_lyapunov_run(0.0, 2.0, 1.0, std::nullopt, 2000, 0.3, -2.0);
  EXPECT_TRUE(wide.report.monotonicity_violations.empty());
  EXPECT_TRUE(wide.report.bound_violations.empty());
}

TEST(Properties, ContinuousEnergyDecaysAlongFlow) {
  Mat a(2, 2);
  a << 1, 0.5, -0.2, 1.5;
  const double mu = 0.8;
  const auto run = continuous_lyapunov_run(a, mu, std::nullopt, 1e-3, 10000, Vec::Ones(2),
                                           Vec::LinSpaced(2, -1, 0.5), 10);
  EXPECT_TRUE(run.report.monotonicity_violations.empty());
  EXPECT_TRUE(run.distance_violations.empty());
  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    EXPECT_LE(run.trace.dist_sq[i], run.trace.energy[i] / run.floor_constant * (1 + 1e-12));
  }
}

TEST(Properties, EnergyDerivativeIdentity) {
  Mat a(2, 2);
  a << 1, 0.5, -0.2, 1.5;
  const double mu = 0.8, q = 2.0 / mu + mu;
  const Game g = Game::bilinear(a);
  FlowState s = FlowState::at_rest(Vec::Ones(2), Vec::LinSpaced(2, -1, 0.5));
  s.vx << 0.3, -0.1;
  const double h = 1e-4;
  for (int k = 0; k < 20; ++k) {
    const auto fwd = rk4_step(g, s, mu, q, h);
    const auto bwd = rk4_step(g, s, mu, q, -h);
    const double fd = (continuous_energy_bilinear(a, fwd, mu) - continuous_energy_bilinear(a, bwd, mu)) / (2 * h);
    const double exact = continuous_energy_rate_bilinear(a, s, mu);
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact));
    s = rk4_integrate(g, s, mu, q, 1e-3, 100).back();
  }
}
