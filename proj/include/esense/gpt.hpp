#pragma once

#include <vector>

#include "esense/geometry.hpp"
#include "esense/potentials.hpp"

namespace esense {

/// Electrical parameters of a target against a unit-conductivity,
/// zero-permittivity background at angular frequency omega.
struct Contrast {
  double sigma = 2.0;
  double epsilon = 0.0;
  double omega = 1.0;

  /// Complex admittivity k = sigma + i epsilon omega.
  cplx k() const { return {sigma, epsilon * omega}; }
  /// Contrast lambda = (k + 1) / (2 (k - 1)). Throws if k == 1.
  cplx lambda() const;
};

cplx lambda_from_admittivity(cplx k);

/// Multi-index alpha = (alpha_1, alpha_2).
struct MultiIndex {
  int i = 0;
  int j = 0;
  int order() const { return i + j; }
  bool operator==(const MultiIndex&) const = default;
};

/// All multi-indices of order m in graded lexicographic order:
/// (m,0), (m-1,1), ..., (0,m).
std::vector<MultiIndex> multi_indices(int m);

/// Coefficients of (x1 + i x2)^m = sum a_alpha x^alpha + i sum b_alpha x^alpha,
/// indexed like multi_indices(m).
struct HarmonicCoeffs {
  int order = 0;
  std::vector<MultiIndex> indices;
  std::vector<double> a;
  std::vector<double> b;

  /// sum_alpha a_alpha x^alpha = r^m cos(m theta).
  double eval_cos(const Vec2& x) const;
  /// sum_alpha b_alpha x^alpha = r^m sin(m theta).
  double eval_sin(const Vec2& x) const;
};

HarmonicCoeffs harmonic_coeffs(int m);

double monomial(const Vec2& x, const MultiIndex& alpha);
Vec2 monomial_gradient(const Vec2& x, const MultiIndex& alpha);

/// Generalized polarization tensor
/// M_{alpha beta} = \int (lambda I - K*)^{-1}[d y^alpha / d nu] y^beta dsigma.
cplx gpt(const Boundary& b, cplx lambda, const MultiIndex& alpha, const MultiIndex& beta);

/// Contracted GPT blocks M_mn = [[cc, cs], [sc, ss]] for 1 <= m, n <= K.
class CgptMatrix {
 public:
  CgptMatrix() = default;
  explicit CgptMatrix(int order);

  int order() const { return order_; }
  CMat2& block(int m, int n) { return blocks_[index(m, n)]; }
  const CMat2& block(int m, int n) const { return blocks_[index(m, n)]; }

  cplx cc(int m, int n) const { return block(m, n)(0, 0); }
  cplx cs(int m, int n) const { return block(m, n)(0, 1); }
  cplx sc(int m, int n) const { return block(m, n)(1, 0); }
  cplx ss(int m, int n) const { return block(m, n)(1, 1); }

  /// First-order block, equal to the 2x2 polarization tensor.
  const CMat2& first_order() const { return block(1, 1); }

  /// Frobenius norm over all blocks.
  double norm() const;

 private:
  int index(int m, int n) const;

  int order_ = 0;
  std::vector<CMat2> blocks_;
};

/// Contracted GPTs up to order K from one resolvent solve per multi-index.
CgptMatrix cgpt(const Boundary& b, cplx lambda, int order);
CgptMatrix cgpt(const Boundary& b, const Resolvent& resolvent, int order);

/// First-order polarization tensor M(D) = \int (lambda I - K*)^{-1}[nu] y^T.
CMat2 first_order_pt(const Boundary& b, const Contrast& c);
CMat2 first_order_pt(const Boundary& b, cplx lambda);

}  // namespace esense
