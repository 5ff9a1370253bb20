#pragma once

#include <vector>

#include <Eigen/Dense>

#include "esense/geometry.hpp"
#include "esense/types.hpp"

namespace esense {

/// Complex density sampled at the nodes of a Boundary.
using Density = Eigen::VectorXcd;

/// Green function of the Laplacian, Delta G = delta: (1/2pi) ln|x| in 2D.
double green(const Vec2& x);
/// -1/(4 pi |x|) in 3D. Provided for completeness; the pipeline is 2D.
double green(const Eigen::Vector3d& x);
/// x / (2 pi |x|^2).
Vec2 green_gradient(const Vec2& x);
/// (I |x|^2 - 2 x x^T) / (2 pi |x|^4).
Mat2 green_hessian(const Vec2& x);

// ---------------------------------------------------------------------------
// Dense Nystrom matrices. Each maps density values at the source nodes to
// values at the targets; quadrature weights are folded in.

/// S[phi](x) = \int G(x - y) phi(y) dsigma(y) at off-curve targets.
Eigen::MatrixXd single_layer_matrix(const Boundary& src, const std::vector<Vec2>& targets);
/// D[phi](x) = \int dG/dnu_y(x - y) phi(y) dsigma(y) at off-curve targets.
Eigen::MatrixXd double_layer_matrix(const Boundary& src, const std::vector<Vec2>& targets);
/// Gradient rows of S at off-curve targets: returns (d/dx1, d/dx2).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> single_layer_gradient_matrix(
    const Boundary& src, const std::vector<Vec2>& targets);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> double_layer_gradient_matrix(
    const Boundary& src, const std::vector<Vec2>& targets);
/// Normal derivative dS/dnu_x at targets with normals `target_normals`.
Eigen::MatrixXd single_layer_normal_matrix(const Boundary& src, const std::vector<Vec2>& targets,
                                           const std::vector<Vec2>& target_normals);
Eigen::MatrixXd double_layer_normal_matrix(const Boundary& src, const std::vector<Vec2>& targets,
                                           const std::vector<Vec2>& target_normals);

/// Neumann-Poincare operator K*[phi](x) = \int dG/dnu_x(x - y) phi dsigma
/// on the curve itself. The kernel is continuous; its diagonal is the
/// curvature limit kappa / (4 pi).
Eigen::MatrixXd neumann_poincare(const Boundary& b);
/// Its adjoint K (direct value of the double layer on the curve).
Eigen::MatrixXd double_layer_on_curve(const Boundary& b);

/// Single layer evaluated on the curve itself with the logarithmic
/// singularity split off (Kress quadrature). Rows correspond to curve points
/// given by their parameter value and position; pass the nodes themselves to
/// get the square matrix. Requires an even node count.
Eigen::MatrixXd single_layer_on_curve(const Boundary& b, const std::vector<double>& params,
                                      const std::vector<Vec2>& points);
Eigen::MatrixXd single_layer_on_curve(const Boundary& b);

/// Normal derivative of the double layer on the curve, dD/dnu, assembled
/// through the Maue identity dD/dnu = d/ds S d/ds.
Eigen::MatrixXd hypersingular(const Boundary& b);

/// Spectral differentiation in the boundary parameter (even node count).
Eigen::MatrixXd param_derivative_matrix(int n);
/// Trigonometric interpolation from node values to arbitrary parameters.
Eigen::MatrixXd trig_interpolation_matrix(int n, const std::vector<double>& params);

// Convenience wrappers -------------------------------------------------------

/// Off-curve single layer. Throws ValidationError when a target coincides
/// with a source node (use single_layer_on_curve there).
Eigen::VectorXcd single_layer(const Boundary& src, const Density& phi,
                              const std::vector<Vec2>& points);
Eigen::VectorXcd double_layer(const Boundary& src, const Density& phi,
                              const std::vector<Vec2>& points);

/// LU factorization of (lambda I - K*) for repeated solves.
class Resolvent {
 public:
  Resolvent(const Boundary& b, cplx lambda);
  Resolvent(const Eigen::MatrixXd& np_matrix, cplx lambda);

  Density solve(const Density& rhs) const;
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;
  double rcond() const { return rcond_; }
  cplx lambda() const { return lambda_; }

 private:
  void factor(const Eigen::MatrixXd& np_matrix);

  cplx lambda_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 0.0;
};

/// Solves (lambda I - K*_b) phi = rhs. Throws NumericalError if the system is
/// numerically singular.
Density solve_resolvent(const Boundary& b, cplx lambda, const Density& rhs);

}  // namespace esense
