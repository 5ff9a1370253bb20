#pragma once

#include <vector>

#include <Eigen/Dense>

#include "esense/gpt.hpp"

namespace esense {

/// Complex combinations of the CGPTs:
///   N1 = (cc - ss) + i (cs + sc),  N2 = (cc + ss) + i (cs - sc).
struct ComplexCgpt {
  Eigen::MatrixXcd n1;
  Eigen::MatrixXcd n2;
};

ComplexCgpt complex_cgpt(const CgptMatrix& m);

/// Translation-normalized combinations T1 = C N1 C^T, T2 = conj(C) N2 C^T
/// with C_mn = binom(m, n) (-u)^(m-n) and u = N2_12 / (2 N2_11).
struct TranslationReduced {
  Eigen::MatrixXcd t1;
  Eigen::MatrixXcd t2;
  cplx shift = 0.0;
};

/// Lower-triangular binomial matrix C_mn = binom(m, n) (-u)^(m-n).
Eigen::MatrixXcd translation_matrix(cplx u, int order);

TranslationReduced translation_reduce(const Eigen::MatrixXcd& n1, const Eigen::MatrixXcd& n2);

/// Shape descriptors truncated at order 2.
struct ShapeDescriptors {
  Eigen::MatrixXcd n1, n2;
  cplx shift = 0.0;
  Eigen::MatrixXcd t1, t2;
  Eigen::MatrixXcd s1, s2;
  Mat2 i1 = Mat2::Zero();
  Mat2 i2 = Mat2::Zero();
};

/// Scale normalization S_mn = T_mn / sqrt(T2_mm T2_nn) (principal root) and
/// moduli I = |S| on the leading 2x2 part.
ShapeDescriptors shape_descriptors(const Eigen::MatrixXcd& t1, const Eigen::MatrixXcd& t2);
/// Full chain from a CGPT matrix of order >= 2.
ShapeDescriptors shape_descriptors(const CgptMatrix& m);

/// Singular values of a 2x2 complex matrix, descending.
Eigen::Vector2d singular_values(const CMat2& m);

/// Per-frequency singular values tau of the first-order PTs and, when at
/// least two frequencies are given, ratios mu^(f) = tau^(f) / tau^(F) for
/// f < F. Frequencies are assumed sorted ascending.
struct PtSpectrum {
  std::vector<Eigen::Vector2d> tau;
  std::vector<Eigen::Vector2d> mu;
};

PtSpectrum pt_spectrum(const std::vector<CMat2>& pts, bool with_ratios = true);

}  // namespace esense
