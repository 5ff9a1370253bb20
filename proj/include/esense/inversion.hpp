#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "esense/forward.hpp"
#include "esense/gpt.hpp"

namespace esense {

/// cos(m theta) / r^m and sin(m theta) / r^m of a planar vector.
double phi_m(const Vec2& v, int m);
double psi_m(const Vec2& v, int m);

/// Coefficients of the harmonic expansion of H around z for every pose:
/// (1/alpha!) d^alpha H(z) = A_m a_alpha^m + B_m b_alpha^m for |alpha| = m.
/// They are complex because the skin flux is complex at complex contrast.
struct SourceCoefficients {
  int order = 0;
  Eigen::MatrixXcd a;  // poses x order, column m-1 holds A_m
  Eigen::MatrixXcd b;
};

/// Coefficients for one pose, m = 1..order.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> source_coeffs(const FishPose& pose, const Density& flux,
                                                          const Vec2& z, int order, double xi = 0.0);
SourceCoefficients source_coeffs(const FishPose& pose, const SkinData& sd, const Vec2& z, int order);
/// Coefficients for all poses; `flux` is S x N.
SourceCoefficients source_coeffs(const std::vector<FishPose>& poses, const Eigen::MatrixXcd& flux,
                                 const Vec2& z, int order, double xi = 0.0);

/// Dense linear map from the CGPT blocks M_mn with m + n <= K + 1 to the
/// stacked data entries, row index s * R + r.
class LinearForwardMap {
 public:
  LinearForwardMap(const std::vector<FishPose>& poses, const SourceCoefficients& coeffs,
                   const Vec2& z, int order);

  int order() const { return order_; }
  int rows() const { return static_cast<int>(matrix_.rows()); }
  int unknowns() const { return static_cast<int>(matrix_.cols()); }
  int positions() const { return positions_; }
  int receptors() const { return receptors_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  /// Blocks (m, n) in column order; each block owns 4 columns cc, cs, sc, ss.
  const std::vector<std::pair<int, int>>& blocks() const { return blocks_; }

  /// Data predicted by a CGPT matrix, as an S x R matrix.
  Eigen::MatrixXcd apply(const CgptMatrix& m) const;
  /// Minimum-norm least-squares CGPTs for an S x R data matrix. Blocks not
  /// covered by the map are zero.
  CgptMatrix recover(const Eigen::MatrixXcd& q) const;

  Eigen::VectorXd singular_values() const { return singular_values_; }
  /// Number of singular values above the relative cutoff.
  int rank() const { return rank_; }

  static constexpr double cutoff = 1e-10;

 private:
  int order_;
  int positions_;
  int receptors_;
  std::vector<std::pair<int, int>> blocks_;
  Eigen::MatrixXcd matrix_;
  Eigen::MatrixXcd pseudo_inverse_;
  Eigen::VectorXd singular_values_;
  int rank_ = 0;
};

LinearForwardMap assemble_operator(const std::vector<FishPose>& poses, const SourceCoefficients& coeffs,
                                   const Vec2& z, int order);

/// Least-squares CGPTs with the map built from the given per-pose data.
CgptMatrix recover_cgpt(const Eigen::MatrixXcd& q, const LinearForwardMap& map);
/// One recovery per frequency of a measurement set.
std::vector<CgptMatrix> recover_cgpt(const MeasurementSet& data, int order);
/// Maps for every frequency of a measurement set.
std::vector<LinearForwardMap> assemble_operators(const MeasurementSet& data, int order);

/// Background-elimination route for the imaginary part of the first-order
/// polarization tensor. Data rows are Im P[flux_f - flux_0] at the receptors;
/// the model is grad U(z)^T X grad_z(dG/dnu_x(x_r - z)) with X real 2x2.
class ImaginaryPtFit {
 public:
  /// `background_gradient[s]` is grad U_s(z).
  ImaginaryPtFit(const std::vector<FishPose>& poses, const std::vector<Vec2>& background_gradient,
                 const Vec2& z);

  /// Fit from an S x R matrix of postprocessed imaginary data.
  Mat2 fit(const Eigen::MatrixXd& y) const;
  /// Same fit followed by symmetrization; also reports the relative
  /// asymmetry ||X - X^T|| / ||X|| of the raw fit.
  Mat2 fit_symmetric(const Eigen::MatrixXd& y, double* asymmetry = nullptr) const;
  /// Rows (s, r) whose background gradient vanished are excluded.
  const std::vector<int>& excluded_poses() const { return excluded_; }

 private:
  Eigen::MatrixXd pseudo_inverse_;  // 4 x (S R)
  std::vector<int> excluded_;
  int positions_;
  int receptors_;
};

/// Background (target-free) skin flux, S x N, and grad U_s(z) per pose.
struct BackgroundField {
  Eigen::MatrixXd flux;
  std::vector<Vec2> gradient;
};

/// Both background quantities from one solve per pose.
BackgroundField background_field(const std::vector<FishPose>& poses, const Vec2& z, double xi = 0.0);

/// grad U_s(z) for every pose.
std::vector<Vec2> background_gradients(const std::vector<FishPose>& poses, const Vec2& z, double xi = 0.0);

/// Im P[flux_f - flux_0] at the receptors, one S x R matrix per frequency.
/// `flux[f]` and `background` are S x N.
std::vector<Eigen::MatrixXd> postprocessed_imaginary_data(const std::vector<FishPose>& poses,
                                                          const std::vector<Eigen::MatrixXcd>& flux,
                                                          const Eigen::MatrixXd& background,
                                                          double xi = 0.0);

/// Im of the first-order polarization tensor recovered from postprocessed
/// skin data (S x R) and the background gradients, symmetrized.
Mat2 recover_pt_imag(const Eigen::MatrixXd& postprocessed, const std::vector<FishPose>& poses,
                     const std::vector<Vec2>& background_gradient, const Vec2& z);

}  // namespace esense
