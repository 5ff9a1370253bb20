#include "esense/features.hpp"

#include <cmath>

namespace esense {

ComplexCgpt complex_cgpt(const CgptMatrix& m) {
  const int k = m.order();
  if (k < 1) throw ValidationError("complex_cgpt: empty CGPT matrix");
  ComplexCgpt out{Eigen::MatrixXcd(k, k), Eigen::MatrixXcd(k, k)};
  const cplx i(0.0, 1.0);
  for (int a = 1; a <= k; ++a)
    for (int b = 1; b <= k; ++b) {
      out.n1(a - 1, b - 1) = (m.cc(a, b) - m.ss(a, b)) + i * (m.cs(a, b) + m.sc(a, b));
      out.n2(a - 1, b - 1) = (m.cc(a, b) + m.ss(a, b)) + i * (m.cs(a, b) - m.sc(a, b));
    }
  return out;
}

Eigen::MatrixXcd translation_matrix(cplx u, int order) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(order, order);
  for (int m = 1; m <= order; ++m) {
    double binom = 1.0;  // binom(m, n) built downward from n = m
    for (int n = m; n >= 1; --n) {
      c(m - 1, n - 1) = binom * std::pow(-u, m - n);
      binom = binom * n / (m - n + 1);
    }
  }
  return c;
}

TranslationReduced translation_reduce(const Eigen::MatrixXcd& n1, const Eigen::MatrixXcd& n2) {
  if (n1.rows() < 2 || n2.rows() < 2 || n1.rows() != n2.rows())
    throw ValidationError("translation_reduce: CGPT order must be at least 2");
  // A first-order term that is negligible against the other entries leaves
  // the translation shift undefined.
  if (std::abs(n2(0, 0)) <= 1e-12 * n2.cwiseAbs().maxCoeff())
    throw NumericalError("translation_reduce: vanishing first-order term");
  TranslationReduced out;
  out.shift = n2(0, 1) / (2.0 * n2(0, 0));
  const Eigen::MatrixXcd c = translation_matrix(out.shift, static_cast<int>(n1.rows()));
  out.t1 = c * n1 * c.transpose();
  out.t2 = c.conjugate() * n2 * c.transpose();
  return out;
}

ShapeDescriptors shape_descriptors(const Eigen::MatrixXcd& t1, const Eigen::MatrixXcd& t2) {
  if (t1.rows() < 2 || t2.rows() < 2) throw ValidationError("shape_descriptors: order must be at least 2");
  ShapeDescriptors d;
  d.t1 = t1.topLeftCorner(2, 2);
  d.t2 = t2.topLeftCorner(2, 2);
  d.s1.resize(2, 2);
  d.s2.resize(2, 2);
  for (int m = 0; m < 2; ++m)
    if (std::abs(d.t2(m, m)) == 0.0) throw NumericalError("shape_descriptors: vanishing normalizer");
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const cplx norm = std::sqrt(d.t2(m, m) * d.t2(n, n));
      d.s1(m, n) = d.t1(m, n) / norm;
      d.s2(m, n) = d.t2(m, n) / norm;
      d.i1(m, n) = std::abs(d.s1(m, n));
      d.i2(m, n) = std::abs(d.s2(m, n));
    }
  return d;
}

ShapeDescriptors shape_descriptors(const CgptMatrix& m) {
  const ComplexCgpt n = complex_cgpt(m);
  const TranslationReduced t = translation_reduce(n.n1, n.n2);
  ShapeDescriptors d = shape_descriptors(t.t1, t.t2);
  d.n1 = n.n1;
  d.n2 = n.n2;
  d.shift = t.shift;
  return d;
}

Eigen::Vector2d singular_values(const CMat2& m) {
  return Eigen::JacobiSVD<CMat2>(m).singularValues();
}

PtSpectrum pt_spectrum(const std::vector<CMat2>& pts, bool with_ratios) {
  if (pts.empty()) throw ValidationError("pt_spectrum: no frequencies");
  PtSpectrum out;
  for (const CMat2& m : pts) out.tau.push_back(singular_values(m));
  if (with_ratios && pts.size() >= 2) {
    const Eigen::Vector2d& top = out.tau.back();
    if (!(top.minCoeff() > 0.0)) throw NumericalError("pt_spectrum: vanishing top-frequency singular value");
    for (size_t f = 0; f + 1 < pts.size(); ++f) out.mu.push_back(out.tau[f].cwiseQuotient(top));
  }
  return out;
}

}  // namespace esense
