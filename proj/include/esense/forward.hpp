#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "esense/geometry.hpp"
#include "esense/gpt.hpp"
#include "esense/potentials.hpp"

namespace esense {

/// Value and gradient of a scalar field at one point.
struct FieldSample {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Potential of a point dipole, p(x) = moment . grad G(x - source).
FieldSample dipole_field(const Vec2& moment, const Vec2& source, const Vec2& x);

/// A penetrable target: its boundary and electrical parameters.
struct Target {
  Boundary boundary;
  Contrast contrast;
};

/// Result of one forward solve for one pose.
struct SkinData {
  int pose = 0;
  int frequency = 0;
  double xi = 0.0;
  /// Normal flux of the potential on the outer side of the skin, at body nodes.
  Density flux;
  /// Density on the target boundary (empty for the background problem).
  Density target_density;
  /// Potential u and the field H at the receptors (exterior traces).
  Eigen::VectorXcd u;
  Eigen::VectorXcd h;
  /// Target-induced perturbation u - H at the receptors.
  Eigen::VectorXcd perturbation;
};

/// Boundary-integral solver for one fish pose, with or without a target.
///
/// Unknowns are the skin flux psi on the body and the density phi on the
/// target. The potential outside the body is
///   u = p + S_body[psi] - xi D_body[psi] + S_target[phi].
/// Everything that does not depend on the target contrast is factored in the
/// constructor, so each frequency costs O(n^2).
class ForwardSolver {
 public:
  explicit ForwardSolver(const FishPose& pose, double xi = 0.0);
  ForwardSolver(const FishPose& pose, const Boundary& target, double xi = 0.0);

  bool has_target() const { return target_.has_value(); }
  const FishPose& pose() const { return pose_; }
  double xi() const { return xi_; }

  /// Problem without a target (the background field U).
  SkinData background() const;
  /// Problem with the target at the given contrast. A contrast with k = 1
  /// returns the background solution.
  SkinData solve(const Contrast& contrast) const;
  SkinData solve_lambda(cplx lambda) const;

 private:
  SkinData assemble(const Density& flux, const Density& target_density) const;

  FishPose pose_;
  double xi_;
  std::optional<Boundary> target_;
  Eigen::PartialPivLU<Eigen::MatrixXd> body_lu_;
  Eigen::VectorXd source_flux_;           // d p / d nu on the body
  Eigen::MatrixXd receptor_single_layer_;  // S_body rows at the receptors
  Eigen::MatrixXd receptor_double_layer_;  // exterior trace of D_body at the receptors
  Eigen::VectorXd receptor_dipole_;        // p at the receptors
  // Target coupling, present when has_target().
  Eigen::MatrixXd body_solve_coupling_;  // A^{-1} B
  Eigen::VectorXd body_solve_source_;    // A^{-1} dp/dnu
  Eigen::MatrixXd hessenberg_;           // Schur complement in Hessenberg form
  Eigen::MatrixXd hessenberg_basis_;
  Eigen::VectorXd reduced_rhs_;          // basis^T (rhs of the Schur complement)
  Eigen::MatrixXd receptor_target_;      // S_target rows at the receptors
};

/// Convenience wrapper: solves one pose, with the target if given.
SkinData solve_forward(const FishPose& pose, const std::optional<Target>& target, double xi = 0.0);

/// Complex value and gradient of H at one point.
struct HSample {
  cplx value = 0.0;
  Eigen::Vector2cd gradient = Eigen::Vector2cd::Zero();
};

/// H = p + S_body[psi] - xi D_body[psi] and its gradient at points off the body.
std::vector<HSample> compute_H(const SkinData& sd, const FishPose& pose,
                                   const std::vector<Vec2>& points);

/// Multi-frequency data for one target seen from all poses.
struct MeasurementSet {
  std::vector<double> frequencies;
  std::vector<FishPose> poses;
  Vec2 target_location = Vec2::Zero();
  double xi = 0.0;
  /// Per frequency: S x R matrix of u - H at the receptors.
  std::vector<Eigen::MatrixXcd> q;
  /// Per frequency: S x N matrix of the skin flux at body nodes.
  std::vector<Eigen::MatrixXcd> flux;

  int positions() const { return static_cast<int>(poses.size()); }
  int receptors() const { return poses.empty() ? 0 : static_cast<int>(poses.front().receptors.size()); }
  int frequency_count() const { return static_cast<int>(frequencies.size()); }
  /// Throws ValidationError when the arrays disagree in size.
  void validate() const;
  /// Copy restricted to a subset of the frequencies.
  MeasurementSet select_frequencies(const std::vector<int>& indices) const;
};

/// Simulates the data matrices for a target under every pose and frequency.
/// `contrasts[f]` must carry omega = frequencies[f].
MeasurementSet data_matrix(const std::vector<FishPose>& poses, const Boundary& target,
                           const std::vector<Contrast>& contrasts, const Vec2& target_location,
                           double xi = 0.0);

/// Skin flux of the background problem for every pose (S x N, real).
Eigen::MatrixXd background_flux(const std::vector<FishPose>& poses, double xi = 0.0);

/// Matrix of the postprocessing operator on the body nodes.
Eigen::MatrixXd postprocessing_matrix(const Boundary& body, double xi = 0.0);

/// Postprocessing operator (1/2 I - K*_body + xi dD_body/dnu) applied to a
/// flux difference on the body. It maps the target-induced change of the
/// skin flux to the normal derivative of the target's single layer.
Density postprocess(const FishPose& pose, const Density& flux_difference, double xi = 0.0);

/// Postprocessed values interpolated to the receptors.
Eigen::VectorXcd postprocess_at_receptors(const FishPose& pose, const Density& flux_difference,
                                          double xi = 0.0);

}  // namespace esense
