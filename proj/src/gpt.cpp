#include "esense/gpt.hpp"

#include <cmath>

namespace esense {

cplx lambda_from_admittivity(cplx k) {
  if (std::abs(k - 1.0) == 0.0) throw ValidationError("contrast k = 1: target equals background");
  return (k + 1.0) / (2.0 * (k - 1.0));
}

cplx Contrast::lambda() const { return lambda_from_admittivity(k()); }

std::vector<MultiIndex> multi_indices(int m) {
  std::vector<MultiIndex> out;
  for (int j = 0; j <= m; ++j) out.push_back({m - j, j});
  return out;
}

HarmonicCoeffs harmonic_coeffs(int m) {
  if (m < 1) throw ValidationError("harmonic_coeffs: order must be at least 1");
  HarmonicCoeffs h;
  h.order = m;
  h.indices = multi_indices(m);
  // (x1 + i x2)^m = sum_j binom(m, j) i^j x1^(m-j) x2^j
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    const int phase = j % 4;  // i^j
    const double re = phase == 0 ? 1.0 : phase == 2 ? -1.0 : 0.0;
    const double im = phase == 1 ? 1.0 : phase == 3 ? -1.0 : 0.0;
    h.a.push_back(binom * re);
    h.b.push_back(binom * im);
    binom = binom * (m - j) / (j + 1);
  }
  return h;
}

double monomial(const Vec2& x, const MultiIndex& alpha) {
  return std::pow(x.x(), alpha.i) * std::pow(x.y(), alpha.j);
}

Vec2 monomial_gradient(const Vec2& x, const MultiIndex& alpha) {
  const double dx = alpha.i == 0 ? 0.0 : alpha.i * std::pow(x.x(), alpha.i - 1) * std::pow(x.y(), alpha.j);
  const double dy = alpha.j == 0 ? 0.0 : alpha.j * std::pow(x.x(), alpha.i) * std::pow(x.y(), alpha.j - 1);
  return {dx, dy};
}

double HarmonicCoeffs::eval_cos(const Vec2& x) const {
  double s = 0.0;
  for (size_t q = 0; q < indices.size(); ++q) s += a[q] * monomial(x, indices[q]);
  return s;
}

double HarmonicCoeffs::eval_sin(const Vec2& x) const {
  double s = 0.0;
  for (size_t q = 0; q < indices.size(); ++q) s += b[q] * monomial(x, indices[q]);
  return s;
}

namespace {

Density normal_derivative_of_monomial(const Boundary& b, const MultiIndex& alpha) {
  Density rhs(b.size());
  for (int j = 0; j < b.size(); ++j) rhs[j] = monomial_gradient(b.nodes[j], alpha).dot(b.normals[j]);
  return rhs;
}

cplx moment(const Boundary& b, const Density& phi, const MultiIndex& beta) {
  cplx s = 0.0;
  for (int j = 0; j < b.size(); ++j) s += b.weights[j] * phi[j] * monomial(b.nodes[j], beta);
  return s;
}

}  // namespace

cplx gpt(const Boundary& b, cplx lambda, const MultiIndex& alpha, const MultiIndex& beta) {
  if (alpha.order() < 1 || beta.order() < 1) throw ValidationError("gpt: |alpha|, |beta| must be >= 1");
  const Resolvent res(b, lambda);
  return moment(b, res.solve(normal_derivative_of_monomial(b, alpha)), beta);
}

CgptMatrix::CgptMatrix(int order) : order_(order), blocks_(order * order, CMat2::Zero()) {
  if (order < 1) throw ValidationError("CGPT order must be at least 1");
}

int CgptMatrix::index(int m, int n) const {
  if (m < 1 || n < 1 || m > order_ || n > order_) throw std::out_of_range("CGPT block index");
  return (m - 1) * order_ + (n - 1);
}

double CgptMatrix::norm() const {
  double s = 0.0;
  for (const CMat2& blk : blocks_) s += blk.squaredNorm();
  return std::sqrt(s);
}

CgptMatrix cgpt(const Boundary& b, cplx lambda, int order) {
  return cgpt(b, Resolvent(b, lambda), order);
}

CgptMatrix cgpt(const Boundary& b, const Resolvent& resolvent, int order) {
  CgptMatrix out(order);
  std::vector<HarmonicCoeffs> coeffs;
  for (int m = 1; m <= order; ++m) coeffs.push_back(harmonic_coeffs(m));

  // GPT tables M_{alpha beta} for |alpha| = m, |beta| = n.
  std::vector<std::vector<Density>> densities(order);
  for (int m = 1; m <= order; ++m)
    for (const MultiIndex& alpha : coeffs[m - 1].indices)
      densities[m - 1].push_back(resolvent.solve(normal_derivative_of_monomial(b, alpha)));

  for (int m = 1; m <= order; ++m) {
    const HarmonicCoeffs& hm = coeffs[m - 1];
    for (int n = 1; n <= order; ++n) {
      const HarmonicCoeffs& hn = coeffs[n - 1];
      CMat2 blk = CMat2::Zero();
      for (size_t p = 0; p < hm.indices.size(); ++p) {
        for (size_t q = 0; q < hn.indices.size(); ++q) {
          const cplx g = moment(b, densities[m - 1][p], hn.indices[q]);
          blk(0, 0) += hm.a[p] * hn.a[q] * g;
          blk(0, 1) += hm.a[p] * hn.b[q] * g;
          blk(1, 0) += hm.b[p] * hn.a[q] * g;
          blk(1, 1) += hm.b[p] * hn.b[q] * g;
        }
      }
      out.block(m, n) = blk;
    }
  }
  return out;
}

CMat2 first_order_pt(const Boundary& b, const Contrast& c) { return first_order_pt(b, c.lambda()); }

CMat2 first_order_pt(const Boundary& b, cplx lambda) {
  const Resolvent res(b, lambda);
  Eigen::MatrixXcd rhs(b.size(), 2);
  for (int j = 0; j < b.size(); ++j) {
    rhs(j, 0) = b.normals[j].x();
    rhs(j, 1) = b.normals[j].y();
  }
  const Eigen::MatrixXcd phi = res.solve(rhs);
  CMat2 pt = CMat2::Zero();
  for (int j = 0; j < b.size(); ++j)
    for (int p = 0; p < 2; ++p) {
      pt(p, 0) += b.weights[j] * phi(j, p) * b.nodes[j].x();
      pt(p, 1) += b.weights[j] * phi(j, p) * b.nodes[j].y();
    }
  return pt;
}

}  // namespace esense
