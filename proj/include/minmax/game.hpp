#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "minmax/errors.hpp"

namespace minmax {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class GameKind { Bilinear, QuadraticMatrix, QuadraticScalar, ScaledSeparable };

// Second-derivative block of f. xy maps a y-direction into x-space
// (d/dy of grad_x f), yx is its transpose.
enum class Block { XY, YX, XX, YY };

inline std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Bilinear: return "bilinear";
    case GameKind::QuadraticMatrix: return "quadratic_matrix";
    case GameKind::QuadraticScalar: return "quadratic_scalar";
    case GameKind::ScaledSeparable: return "scaled_separable";
  }
  return "unknown";
}

struct Gradients {
  Vec gx;
  Vec gy;
};

// An analytic zero-sum game min_x max_y f(x, y). Every supported kind is a
// quadratic form without linear terms, so the game is fully described by its
// constant Hessian blocks and the Nash equilibrium sits at the origin.
// Immutable after construction.
class Game {
 public:
  // f = x^T A y
  static Game bilinear(Mat a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
      throw ShapeError("bilinear game needs a non-empty square coupling matrix");
    }
    const auto n = a.rows();
    Game g(GameKind::Bilinear);
    g.hxx_ = Mat::Zero(n, n);
    g.hyy_ = Mat::Zero(n, n);
    g.hxy_ = std::move(a);
    return g;
  }

  // f = 1/2 x^T H x + x^T A y - 1/2 y^T G y
  static Game quadratic_matrix(Mat h, Mat a, Mat gmat) {
    const auto n = a.rows();
    if (n == 0 || a.cols() != n || h.rows() != n || h.cols() != n || gmat.rows() != n ||
        gmat.cols() != n) {
      throw ShapeError("quadratic game needs H, A, G all n x n");
    }
    if (!h.isApprox(h.transpose(), 1e-12) || !gmat.isApprox(gmat.transpose(), 1e-12)) {
      throw ShapeError("quadratic game needs symmetric H and G");
    }
    Game g(GameKind::QuadraticMatrix);
    g.hxx_ = std::move(h);
    g.hxy_ = std::move(a);
    g.hyy_ = -gmat;
    return g;
  }

  // f = (h/2) x^2 - (h/2) y^2 + x y
  static Game quadratic_scalar(double h) {
    if (!(h >= 0.0) || !std::isfinite(h)) {
      throw NumericError("quadratic_scalar needs finite h >= 0");
    }
    Game g(GameKind::QuadraticScalar);
    g.scalar_ = h;
    g.hxx_ = Mat::Constant(1, 1, h);
    g.hxy_ = Mat::Constant(1, 1, 1.0);
    g.hyy_ = Mat::Constant(1, 1, -h);
    return g;
  }

  // f = gamma (x^2 - y^2)
  static Game scaled_separable(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw NumericError("scaled_separable needs finite gamma > 0");
    }
    Game g(GameKind::ScaledSeparable);
    g.scalar_ = gamma;
    g.hxx_ = Mat::Constant(1, 1, 2.0 * gamma);
    g.hxy_ = Mat::Zero(1, 1);
    g.hyy_ = Mat::Constant(1, 1, -2.0 * gamma);
    return g;
  }

  static Game identity(Eigen::Index n) { return bilinear(Mat::Identity(n, n)); }

  // Bilinear game with i.i.d. N(0, 1/n) coupling entries.
  static Game random_gaussian(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng);
    }
    return bilinear(std::move(a));
  }

  GameKind kind() const noexcept { return kind_; }
  Eigen::Index dim_x() const noexcept { return hxy_.rows(); }
  Eigen::Index dim_y() const noexcept { return hxy_.cols(); }

  // Constant Hessian blocks.
  const Mat& hess_xx() const noexcept { return hxx_; }
  const Mat& hess_xy() const noexcept { return hxy_; }
  const Mat& hess_yy() const noexcept { return hyy_; }
  // h for QuadraticScalar, gamma for ScaledSeparable, 0 otherwise.
  double scalar_param() const noexcept { return scalar_; }
  // The coupling matrix A (the xy block).
  const Mat& coupling() const noexcept { return hxy_; }

  void check_shapes(const Vec& x, const Vec& y) const {
    if (x.size() != dim_x() || y.size() != dim_y()) {
      throw ShapeError("state shape (" + std::to_string(x.size()) + ", " +
                       std::to_string(y.size()) + ") does not match game (" +
                       std::to_string(dim_x()) + ", " + std::to_string(dim_y()) + ")");
    }
  }

  double eval_f(const Vec& x, const Vec& y) const {
    check_shapes(x, y);
    switch (kind_) {
      case GameKind::Bilinear:
        return x.dot(hxy_ * y);
      case GameKind::QuadraticMatrix:
        return 0.5 * x.dot(hxx_ * x) + x.dot(hxy_ * y) + 0.5 * y.dot(hyy_ * y);
      case GameKind::QuadraticScalar: {
        const double h = scalar_;
        return 0.5 * h * x[0] * x[0] - 0.5 * h * y[0] * y[0] + x[0] * y[0];
      }
      case GameKind::ScaledSeparable:
        return scalar_ * (x[0] * x[0] - y[0] * y[0]);
    }
    return 0.0;
  }

  Gradients grads(const Vec& x, const Vec& y) const {
    check_shapes(x, y);
    if (kind_ == GameKind::Bilinear) {
      return {hxy_ * y, hxy_.transpose() * x};
    }
    return {hxx_ * x + hxy_ * y, hxy_.transpose() * x + hyy_ * y};
  }

  Vec jvp(Block block, const Vec& v) const {
    const Mat* m = nullptr;
    bool transpose = false;
    switch (block) {
      case Block::XY: m = &hxy_; break;
      case Block::YX: m = &hxy_; transpose = true; break;
      case Block::XX: m = &hxx_; break;
      case Block::YY: m = &hyy_; break;
    }
    const auto in_dim = transpose ? m->rows() : m->cols();
    if (v.size() != in_dim) {
      throw ShapeError("jvp input has size " + std::to_string(v.size()) + ", block expects " +
                       std::to_string(in_dim));
    }
    return transpose ? Vec(m->transpose() * v) : Vec(*m * v);
  }

  // (grad_x f, -grad_y f)
  Vec vector_field(const Vec& x, const Vec& y) const {
    const auto g = grads(x, y);
    Vec v(g.gx.size() + g.gy.size());
    v << g.gx, -g.gy;
    return v;
  }

  // Jacobian of vector_field; constant for quadratic games.
  Mat vector_field_jacobian() const {
    const auto nx = dim_x(), ny = dim_y();
    Mat j(nx + ny, nx + ny);
    j.topLeftCorner(nx, nx) = hxx_;
    j.topRightCorner(nx, ny) = hxy_;
    j.bottomLeftCorner(ny, nx) = -hxy_.transpose();
    j.bottomRightCorner(ny, ny) = -hyy_;
    return j;
  }

  // Central-difference gradient, for tests.
  Gradients fd_grad(const Vec& x, const Vec& y, double step) const {
    check_shapes(x, y);
    if (!(step > 0.0)) throw NumericError("fd_grad step must be positive");
    Gradients g{Vec(x.size()), Vec(y.size())};
    Vec xp = x, yp = y;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + step;
      const double fp = eval_f(xp, y);
      xp[i] = x[i] - step;
      const double fm = eval_f(xp, y);
      xp[i] = x[i];
      g.gx[i] = (fp - fm) / (2.0 * step);
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      yp[i] = y[i] + step;
      const double fp = eval_f(x, yp);
      yp[i] = y[i] - step;
      const double fm = eval_f(x, yp);
      yp[i] = y[i];
      g.gy[i] = (fp - fm) / (2.0 * step);
    }
    return g;
  }

 private:
  explicit Game(GameKind kind) : kind_(kind) {}

  GameKind kind_;
  double scalar_ = 0.0;
  Mat hxx_, hxy_, hyy_;
};

// Current and previous iterate of both players.
struct JointState {
  Vec x, y;
  Vec x_prev, y_prev;
  std::optional<Vec> vx, vy;
  std::uint64_t k = 0;

  // Cold start: zero first difference.
  static JointState at(Vec x0, Vec y0) {
    JointState s;
    s.x_prev = x0;
    s.y_prev = y0;
    s.x = std::move(x0);
    s.y = std::move(y0);
    return s;
  }

  Vec dx() const { return x - x_prev; }
  Vec dy() const { return y - y_prev; }
  double dist_sq() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(dist_sq()); }
};

}  // namespace minmax
