#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "minmax/spectral.hpp"

using namespace minmax;

namespace {

const Complex I1(0.0, 1.0);

Mat diag(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = d(rng);
  return a;
}

}  // namespace

TEST(GdaSpectrum, Examples) {
  const auto r = gda_spectrum(Mat::Constant(1, 1, 1.0), 0.1);
  ASSERT_EQ(r.eigenvalues.size(), 2u);
  EXPECT_NEAR(std::abs(r.eigenvalues[0] - Complex(1, -0.1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(r.eigenvalues[1] - Complex(1, 0.1)), 0, 1e-15);
  EXPECT_NEAR(r.spectral_radius, std::sqrt(1.01), 1e-15);
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(gda_spectrum(Mat::Constant(1, 1, 1.0), 1e-9).spectral_radius, 1.0, 1e-15);
  EXPECT_NEAR(gda_spectrum(diag(1, 2), 0.5).spectral_radius, std::sqrt(2.0), 1e-14);
}

TEST(GdaSpectrum, MatchesAssembledOperator) {
  std::mt19937_64 rng(3);
  const Mat a = random_matrix(3, rng);
  const auto closed = gda_spectrum(a, 0.2);
  const auto numeric = numeric_spectrum(assemble_gda_operator(a, 0.2));
  EXPECT_LT(multiset_distance(numeric.eigenvalues, closed.eigenvalues), 1e-12);
}

TEST(LeadMu, NoCouplingNoMomentumIsGda) {
  const auto mu = lead_mu_closed_form(I1 * 0.7, 0.0, 0.0, 0.3);
  EXPECT_EQ(mu.plus, 1.0 - 0.3 * I1 * 0.7);
  EXPECT_EQ(mu.minus, Complex(0.0));
}

TEST(LeadMu, TunedPointEqualModuli) {
  const auto mu = lead_mu_closed_form(I1, 0.5, 0.0, 0.5);
  EXPECT_NEAR(std::norm(mu.plus), 0.5, 1e-14);
  EXPECT_NEAR(std::norm(mu.minus), 0.5, 1e-14);
}

TEST(LeadMu, FirstOrderExpansion) {
  const double eta = 0.1;
  for (double alpha : {0.05, 0.02, 0.01}) {
    const auto mu = lead_mu_closed_form(I1, alpha, 0.0, eta);
    const Complex g = 1.0 - eta * I1;
    const Complex plus = g + alpha * I1 * (eta * I1 / g);
    const Complex minus = -alpha * I1 / g;
    // Second-order remainder.
    EXPECT_LT(std::abs(mu.plus - plus), 20 * alpha * alpha);
    EXPECT_LT(std::abs(mu.minus - minus), 20 * alpha * alpha);
  }
}

TEST(LeadMu, RootIdentities) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Complex lam(0.0, 3 * u(rng) - 1.5);
    const double a = u(rng), b = u(rng), e = u(rng);
    const auto mu = lead_mu_closed_form(lam, a, b, e);
    EXPECT_LT(std::abs(mu.plus * mu.minus - (b - a * lam)), 1e-14);
    EXPECT_LT(std::abs(mu.plus + mu.minus - (1.0 - (e + a) * lam + b)), 1e-14);
  }
}

TEST(LeadMu, LabelFollowsContinuation) {
  // Small alpha keeps mu_plus next to the GDA eigenvalue.
  const auto mu = lead_mu_closed_form(I1 * 2.0, 1e-3, 0.0, 0.2);
  EXPECT_LT(std::abs(mu.plus - (1.0 - 0.4 * I1)), 1e-2);
  EXPECT_LT(std::abs(mu.minus), 1e-2);
}

TEST(LeadOperator, AllZeroCoefficients) {
  const Mat op = assemble_lead_operator(Mat::Constant(1, 1, 1.0), 0, 0, 0);
  Mat expect = Mat::Zero(4, 4);
  expect.topLeftCorner(2, 2) = Mat::Identity(2, 2);
  expect.bottomLeftCorner(2, 2) = Mat::Identity(2, 2);
  EXPECT_EQ(op, expect);
}

TEST(LeadOperator, BlockSubstitution) {
  const Mat op = assemble_lead_operator(Mat::Constant(1, 1, 1.0), 0.1, 0.2, 0.3);
  Mat v(2, 2);
  v << 0, 1, -1, 0;
  EXPECT_LT((op.topLeftCorner(2, 2) - (1.2 * Mat::Identity(2, 2) - 0.4 * v)).norm(), 1e-15);
  EXPECT_LT((op.topRightCorner(2, 2) - (-0.2 * Mat::Identity(2, 2) + 0.3 * v)).norm(), 1e-15);
  EXPECT_EQ(op.bottomRightCorner(2, 2), Mat::Zero(2, 2));
  EXPECT_THROW(assemble_lead_operator(Mat::Zero(2, 3), 0.1, 0, 0), ShapeError);
}

TEST(LeadOperator, EigenvaluesMatchClosedForm) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index n : {1, 2, 4, 8}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Mat a = random_matrix(n, rng);
      const double e = u(rng), b = u(rng), al = u(rng);
      const auto closed = lead_spectrum(a, e, b, al);
      ASSERT_EQ(closed.eigenvalues.size(), static_cast<std::size_t>(4 * n));
      const auto numeric = numeric_spectrum(assemble_lead_operator(a, e, b, al));
      EXPECT_LT(multiset_distance(numeric.eigenvalues, closed.eigenvalues), 1e-10) << "n=" << n;
    }
  }
}

TEST(LeadOperator, RadiusIsMaxModulus) {
  const auto r = lead_spectrum(diag(1, 2), 0.25, 0.0, 0.25);
  double m = 0;
  for (auto e : r.eigenvalues) m = std::max(m, std::abs(e));
  EXPECT_EQ(r.spectral_radius, m);
  EXPECT_DOUBLE_EQ(r.predicted_rate, m * m);
  EXPECT_TRUE(r.converged);
}

TEST(TunedRate, Examples) {
  const auto id = tuned_lead_rate(Mat::Identity(3, 3));
  EXPECT_DOUBLE_EQ(id.rate, 0.5);
  EXPECT_DOUBLE_EQ(id.eta_alpha, 0.5);
  const auto d = tuned_lead_rate(diag(1, 2));
  EXPECT_NEAR(d.rate, 0.5 + 0.5 * std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.eta_alpha, 0.25);
  EXPECT_NEAR(tuned_lead_rate(diag(1e-9, 1)).rate, 1.0, 1e-12);
  EXPECT_THROW(tuned_lead_rate(Mat::Zero(2, 2)), NumericError);
}

TEST(TunedRate, AgreesWithSpectrum) {
  std::mt19937_64 rng(8);
  const Mat a = random_matrix(4, rng);
  const auto t = tuned_lead_rate(a);
  const auto s = lead_spectrum(a, t.eta_alpha, 0.0, t.eta_alpha);
  EXPECT_NEAR(s.predicted_rate, t.rate, 1e-12);
}

TEST(AlphaDerivative, Examples) {
  EXPECT_NEAR(radius_alpha_derivative(I1, 0.5), -0.6, 1e-15);
  EXPECT_DOUBLE_EQ(radius_alpha_derivative(I1, 1.0), 0.0);
  EXPECT_GT(radius_alpha_derivative(I1, 1.5), 0.0);
  EXPECT_THROW(radius_alpha_derivative(Complex(0.1, 1.0), 0.5), CapabilityError);
}

TEST(AlphaDerivative, MatchesFiniteDifference) {
  const double h = 1e-6;
  for (double eta = 0.1; eta < 0.95; eta += 0.1) {
    for (double xi : {0.5, 1.0, 2.0}) {
      const Complex lam = I1 * xi;
      const double fd = (limiting_radius_sq(lam, h, 0, eta) - limiting_radius_sq(lam, -h, 0, eta)) / (2 * h);
      EXPECT_NEAR(fd, radius_alpha_derivative(lam, eta), 1e-5) << eta << " " << xi;
    }
  }
}

TEST(MultisetDistance, SizeMismatch) {
  EXPECT_TRUE(std::isinf(multiset_distance({Complex(1)}, {})));
  EXPECT_EQ(multiset_distance({Complex(1), Complex(2)}, {Complex(2), Complex(1)}), 0.0);
}
