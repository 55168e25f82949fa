#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "minmax/errors.hpp"
#include "minmax/game.hpp"

namespace minmax {

using Complex = std::complex<double>;

// The two LEAD eigenvalues generated by one vector-field eigenvalue lambda.
struct LambdaRoots {
  Complex lambda;
  Complex mu_plus;
  Complex mu_minus;
};

struct SpectralReport {
  std::vector<Complex> eigenvalues;
  double spectral_radius = 0.0;
  // Contraction factor of the squared-distance measure (spectral_radius^2).
  double predicted_rate = 0.0;
  bool converged = false;
  std::vector<LambdaRoots> per_lambda;
};

inline Vec singular_values(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ShapeError("expected a non-empty square matrix");
  return Eigen::JacobiSVD<Mat>(a).singularValues();
}

// Spectrum of the bilinear vector-field Jacobian [0, A; -A^T, 0]: +-i sigma_j.
inline std::vector<Complex> bilinear_field_eigenvalues(const Mat& a) {
  const Vec s = singular_values(a);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(2 * s.size()));
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    out.emplace_back(0.0, s[j]);
    out.emplace_back(0.0, -s[j]);
  }
  return out;
}

namespace detail {

inline void finish_report(SpectralReport& r) {
  r.spectral_radius = 0.0;
  for (const auto& e : r.eigenvalues) r.spectral_radius = std::max(r.spectral_radius, std::abs(e));
  r.predicted_rate = r.spectral_radius * r.spectral_radius;
  r.converged = r.spectral_radius < 1.0;
}

// Both roots of X^2 - b X + c, computed without cancellation.
inline std::pair<Complex, Complex> quadratic_roots(Complex b, Complex c) {
  const Complex sq = std::sqrt(b * b - 4.0 * c);
  const Complex big = (std::real(std::conj(b) * sq) >= 0.0) ? (b + sq) / 2.0 : (b - sq) / 2.0;
  const Complex small = big == Complex(0.0) ? Complex(0.0) : c / big;
  return {big, small};
}

}  // namespace detail

// GDA operator I - eta grad v on a bilinear game.
inline SpectralReport gda_spectrum(const Mat& a, double eta) {
  SpectralReport r;
  for (const Complex& lam : bilinear_field_eigenvalues(a)) {
    const Complex e = 1.0 - eta * lam;
    r.eigenvalues.push_back(e);
    r.per_lambda.push_back({lam, e, Complex(0.0)});
  }
  detail::finish_report(r);
  return r;
}

struct MuPair {
  Complex plus;
  Complex minus;
};

// Roots of X^2 - X (1 - (eta + alpha) lambda + beta) + (beta - alpha lambda).
// mu_plus is the root that continues from 1 - eta lambda when (alpha, beta)
// is switched on from zero; the labels are tracked along that path.
inline MuPair lead_mu_closed_form(Complex lambda, double alpha, double beta, double eta) {
  auto coeffs = [&](double s) {
    const Complex b = 1.0 - (eta + s * alpha) * lambda + s * beta;
    const Complex c = s * beta - s * alpha * lambda;
    return std::pair{b, c};
  };
  MuPair cur{1.0 - eta * lambda, Complex(0.0)};
  if (alpha == 0.0 && beta == 0.0) return cur;
  constexpr int kSteps = 256;
  for (int i = 1; i <= kSteps; ++i) {
    const auto [b, c] = coeffs(static_cast<double>(i) / kSteps);
    const auto [r1, r2] = detail::quadratic_roots(b, c);
    const double keep = std::abs(r1 - cur.plus) + std::abs(r2 - cur.minus);
    const double swap = std::abs(r2 - cur.plus) + std::abs(r1 - cur.minus);
    cur = keep <= swap ? MuPair{r1, r2} : MuPair{r2, r1};
  }
  return cur;
}

// Jacobian of the LEAD map (w_t, w_{t-1}) -> (w_{t+1}, w_t) on x^T A y:
//   [ (1 + beta) I - (eta + alpha) V,  -beta I + alpha V ]
//   [ I,                                0                 ]
// with V = [0, A; -A^T, 0].
inline Mat assemble_lead_operator(const Mat& a, double eta, double beta, double alpha) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ShapeError("expected a non-empty square matrix");
  const auto n = a.rows();
  Mat v = Mat::Zero(2 * n, 2 * n);
  v.topRightCorner(n, n) = a;
  v.bottomLeftCorner(n, n) = -a.transpose();
  const Mat id = Mat::Identity(2 * n, 2 * n);
  Mat op = Mat::Zero(4 * n, 4 * n);
  op.topLeftCorner(2 * n, 2 * n) = (1.0 + beta) * id - (eta + alpha) * v;
  op.topRightCorner(2 * n, 2 * n) = -beta * id + alpha * v;
  op.bottomLeftCorner(2 * n, 2 * n) = id;
  return op;
}

inline Mat assemble_gda_operator(const Mat& a, double eta) {
  const auto n = a.rows();
  Mat v = Mat::Zero(2 * n, 2 * n);
  v.topRightCorner(n, n) = a;
  v.bottomLeftCorner(n, n) = -a.transpose();
  return Mat::Identity(2 * n, 2 * n) - eta * v;
}

// Closed-form LEAD spectrum on x^T A y (4n eigenvalues).
inline SpectralReport lead_spectrum(const Mat& a, double eta, double beta, double alpha) {
  SpectralReport r;
  for (const Complex& lam : bilinear_field_eigenvalues(a)) {
    const auto mu = lead_mu_closed_form(lam, alpha, beta, eta);
    r.eigenvalues.push_back(mu.plus);
    r.eigenvalues.push_back(mu.minus);
    r.per_lambda.push_back({lam, mu.plus, mu.minus});
  }
  detail::finish_report(r);
  return r;
}

// Dense nonsymmetric eigensolve (QR iteration), used as the independent check.
inline SpectralReport numeric_spectrum(const Mat& m) {
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SolverError("eigensolver did not converge", 0.0);
  SpectralReport r;
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) r.eigenvalues.push_back(ev[i]);
  detail::finish_report(r);
  return r;
}

// Largest distance between two equal-size multisets under greedy nearest
// pairing. Infinity if the sizes differ.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  auto lex = [](const Complex& p, const Complex& q) {
    return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
  };
  std::sort(a.begin(), a.end(), lex);
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const Complex& p : a) {
    std::size_t best = b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(p - b[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

struct TunedRate {
  double rate;       // per-step contraction of ||w_{t+1}||^2 + ||w_t||^2
  double eta_alpha;  // the prescribed eta = alpha
};

// LEAD with beta = 0 and eta = alpha = 1 / (2 sigma_max):
// rate 1/2 + 1/2 sqrt(1 - sigma_min^2 / sigma_max^2).
inline TunedRate tuned_lead_rate(const Mat& a) {
  const Vec s = singular_values(a);
  const double smax = s.maxCoeff();
  const double smin = s.minCoeff();
  if (!(smax > 0.0)) throw NumericError("rate is undefined for a zero coupling matrix");
  const double ratio = smin / smax;
  return {0.5 + 0.5 * std::sqrt(std::max(0.0, 1.0 - ratio * ratio)), 1.0 / (2.0 * smax)};
}

// |mu_plus|^2 and max(|mu_plus|^2, |mu_minus|^2) for one lambda.
inline double limiting_radius_sq(Complex lambda, double alpha, double beta, double eta) {
  return std::norm(lead_mu_closed_form(lambda, alpha, beta, eta).plus);
}
inline double radius_sq(Complex lambda, double alpha, double beta, double eta) {
  const auto mu = lead_mu_closed_form(lambda, alpha, beta, eta);
  return std::max(std::norm(mu.plus), std::norm(mu.minus));
}

// d/d alpha of |mu_plus|^2 at alpha = 0, beta = 0, for lambda = i xi:
//   (2 eta / |1 - eta lambda|^2) (eta^2 xi^4 - xi^2)
// Negative exactly when 0 < eta < 1 / xi.
inline double radius_alpha_derivative(Complex lambda, double eta) {
  if (std::abs(lambda.real()) > 1e-14 * std::max(1.0, std::abs(lambda))) {
    throw CapabilityError("alpha-derivative formula needs a purely imaginary eigenvalue");
  }
  const double xi = lambda.imag();
  const double xi2 = xi * xi;
  return 2.0 * eta / std::norm(1.0 - eta * lambda) * (eta * eta * xi2 * xi2 - xi2);
}

}  // namespace minmax
