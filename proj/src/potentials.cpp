#include "esense/potentials.hpp"

#include <cmath>

namespace esense {

double green(const Vec2& x) {
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("green: singular at the origin");
  return std::log(r) / two_pi;
}

double green(const Eigen::Vector3d& x) {
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("green: singular at the origin");
  return -1.0 / (4.0 * pi * r);
}

Vec2 green_gradient(const Vec2& x) {
  const double r2 = x.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("green_gradient: singular at the origin");
  return x / (two_pi * r2);
}

Mat2 green_hessian(const Vec2& x) {
  const double r2 = x.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("green_hessian: singular at the origin");
  return (Mat2::Identity() * r2 - 2.0 * x * x.transpose()) / (two_pi * r2 * r2);
}

Eigen::MatrixXd single_layer_matrix(const Boundary& src, const std::vector<Vec2>& targets) {
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd mat(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      mat(i, j) = std::log((targets[i] - src.nodes[j]).squaredNorm()) / (2.0 * two_pi) * src.weights[j];
  return mat;
}

Eigen::MatrixXd double_layer_matrix(const Boundary& src, const std::vector<Vec2>& targets) {
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd mat(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 r = src.nodes[j] - targets[i];
      mat(i, j) = r.dot(src.normals[j]) / (two_pi * r.squaredNorm()) * src.weights[j];
    }
  return mat;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> single_layer_gradient_matrix(
    const Boundary& src, const std::vector<Vec2>& targets) {
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd gx(m, n), gy(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 g = green_gradient(targets[i] - src.nodes[j]) * src.weights[j];
      gx(i, j) = g.x();
      gy(i, j) = g.y();
    }
  return {gx, gy};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> double_layer_gradient_matrix(
    const Boundary& src, const std::vector<Vec2>& targets) {
  // Kernel dG/dnu_y(x - y) = -grad G(x - y) . nu_y, so its x-gradient is
  // -Hess G(x - y) nu_y.
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd gx(m, n), gy(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 g = -green_hessian(targets[i] - src.nodes[j]) * src.normals[j] * src.weights[j];
      gx(i, j) = g.x();
      gy(i, j) = g.y();
    }
  return {gx, gy};
}

Eigen::MatrixXd single_layer_normal_matrix(const Boundary& src, const std::vector<Vec2>& targets,
                                           const std::vector<Vec2>& target_normals) {
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd mat(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      mat(i, j) = green_gradient(targets[i] - src.nodes[j]).dot(target_normals[i]) * src.weights[j];
  return mat;
}

Eigen::MatrixXd double_layer_normal_matrix(const Boundary& src, const std::vector<Vec2>& targets,
                                           const std::vector<Vec2>& target_normals) {
  const int m = static_cast<int>(targets.size()), n = src.size();
  Eigen::MatrixXd mat(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      mat(i, j) = -target_normals[i].dot(green_hessian(targets[i] - src.nodes[j]) * src.normals[j]) *
                  src.weights[j];
  return mat;
}

Eigen::MatrixXd neumann_poincare(const Boundary& b) {
  const int n = b.size();
  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) {
        k(i, i) = b.curvature[i] / (2.0 * two_pi) * b.weights[i];
        continue;
      }
      const Vec2 r = b.nodes[i] - b.nodes[j];
      k(i, j) = r.dot(b.normals[i]) / (two_pi * r.squaredNorm()) * b.weights[j];
    }
  return k;
}

Eigen::MatrixXd double_layer_on_curve(const Boundary& b) {
  const int n = b.size();
  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) {
        k(i, i) = b.curvature[i] / (2.0 * two_pi) * b.weights[i];
        continue;
      }
      const Vec2 r = b.nodes[j] - b.nodes[i];
      k(i, j) = r.dot(b.normals[j]) / (two_pi * r.squaredNorm()) * b.weights[j];
    }
  return k;
}

namespace {

// Weight function for \int_0^{2pi} ln(4 sin^2((t - tau)/2)) f(tau) dtau with
// f interpolated at 2n equispaced nodes.
double kress_weight(double t, int half) {
  double sum = 0.0;
  for (int m = 1; m < half; ++m) sum += std::cos(m * t) / m;
  return -(two_pi / half) * sum - (pi / (double(half) * half)) * std::cos(half * t);
}

double wrapped_distance(double t) {
  double d = std::fmod(t, two_pi);
  if (d < 0) d += two_pi;
  return std::min(d, two_pi - d);
}

}  // namespace

Eigen::MatrixXd single_layer_on_curve(const Boundary& b, const std::vector<double>& params,
                                      const std::vector<Vec2>& points) {
  const int n = b.size();
  if (n % 2 != 0) throw ValidationError("on-curve single layer needs an even node count");
  const int half = n / 2;
  const double h = b.param_step();
  const int m = static_cast<int>(params.size());
  Eigen::MatrixXd mat(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double dt = params[i] - b.param(j);
      double smooth;
      if (wrapped_distance(dt) < 1e-13) {
        smooth = std::log(b.speed(j));
      } else {
        const double s = std::sin(0.5 * dt);
        smooth = std::log((points[i] - b.nodes[j]).norm()) - 0.5 * std::log(4.0 * s * s);
      }
      const double f_weight = 0.5 * kress_weight(dt, half) + h * smooth;
      mat(i, j) = f_weight * b.speed(j) / two_pi;
    }
  }
  return mat;
}

Eigen::MatrixXd single_layer_on_curve(const Boundary& b) {
  std::vector<double> params(b.size());
  for (int j = 0; j < b.size(); ++j) params[j] = b.param(j);
  return single_layer_on_curve(b, params, b.nodes);
}

Eigen::MatrixXd param_derivative_matrix(int n) {
  if (n % 2 != 0) throw ValidationError("spectral differentiation needs an even node count");
  const double h = two_pi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sign / std::tan(0.5 * (i - j) * h);
    }
  return d;
}

Eigen::MatrixXd trig_interpolation_matrix(int n, const std::vector<double>& params) {
  if (n % 2 != 0) throw ValidationError("trigonometric interpolation needs an even node count");
  const double h = two_pi / n;
  const int m = static_cast<int>(params.size());
  Eigen::MatrixXd mat(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double dt = params[i] - h * j;
      if (wrapped_distance(dt) < 1e-14) {
        mat(i, j) = 1.0;
        continue;
      }
      mat(i, j) = std::sin(0.5 * n * dt) / std::tan(0.5 * dt) / n;
    }
  return mat;
}

Eigen::MatrixXd hypersingular(const Boundary& b) {
  const int n = b.size();
  const Eigen::MatrixXd d = param_derivative_matrix(n);
  Eigen::VectorXd inv_speed(n);
  for (int j = 0; j < n; ++j) inv_speed[j] = 1.0 / b.speed(j);
  const Eigen::MatrixXd s = single_layer_on_curve(b);
  const Eigen::MatrixXd ds = inv_speed.asDiagonal() * d;  // d/ds
  return ds * s * ds;
}

namespace {

void reject_on_node(const Boundary& src, const std::vector<Vec2>& points) {
  const double scale = src.perimeter();
  for (const Vec2& x : points)
    for (const Vec2& y : src.nodes)
      if ((x - y).norm() <= 1e-14 * scale)
        throw ValidationError("layer potential evaluated at a source node; use the on-curve rule");
}

}  // namespace

Eigen::VectorXcd single_layer(const Boundary& src, const Density& phi,
                              const std::vector<Vec2>& points) {
  if (phi.size() != src.size()) throw ValidationError("density length does not match boundary");
  reject_on_node(src, points);
  return single_layer_matrix(src, points).cast<cplx>() * phi;
}

Eigen::VectorXcd double_layer(const Boundary& src, const Density& phi,
                              const std::vector<Vec2>& points) {
  if (phi.size() != src.size()) throw ValidationError("density length does not match boundary");
  reject_on_node(src, points);
  return double_layer_matrix(src, points).cast<cplx>() * phi;
}

Resolvent::Resolvent(const Boundary& b, cplx lambda) : lambda_(lambda) {
  factor(neumann_poincare(b));
}

Resolvent::Resolvent(const Eigen::MatrixXd& np_matrix, cplx lambda) : lambda_(lambda) {
  factor(np_matrix);
}

void Resolvent::factor(const Eigen::MatrixXd& np_matrix) {
  const int n = static_cast<int>(np_matrix.rows());
  Eigen::MatrixXcd a = -np_matrix.cast<cplx>();
  a.diagonal().array() += lambda_;
  lu_.compute(a);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-13))
    throw NumericalError("resolvent (lambda I - K*) is numerically singular (n = " +
                             std::to_string(n) + ")",
                         rcond_);
}

Density Resolvent::solve(const Density& rhs) const {
  if (rhs.size() != lu_.rows()) throw ValidationError("resolvent: rhs length mismatch");
  return lu_.solve(rhs);
}

Eigen::MatrixXcd Resolvent::solve(const Eigen::MatrixXcd& rhs) const {
  if (rhs.rows() != lu_.rows()) throw ValidationError("resolvent: rhs length mismatch");
  return lu_.solve(rhs);
}

Density solve_resolvent(const Boundary& b, cplx lambda, const Density& rhs) {
  return Resolvent(b, lambda).solve(rhs);
}

}  // namespace esense
