#include "esense/inversion.hpp"

#include <cmath>
#include <complex>

#include "parallel.hpp"

namespace esense {

namespace {

// v^{-m} as a complex number: cos(m theta)/r^m - i sin(m theta)/r^m.
cplx inverse_power(const Vec2& v, int m) { return std::pow(cplx(v.x(), v.y()), -m); }

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& a, Eigen::VectorXd& sv, int& rank, double cutoff) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sv = svd.singularValues();
  rank = 0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  if (sv.size() > 0 && sv[0] > 0.0) {
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > cutoff * sv[0]) {
        inv[i] = 1.0 / sv[i];
        ++rank;
      }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace

double phi_m(const Vec2& v, int m) { return inverse_power(v, m).real(); }
double psi_m(const Vec2& v, int m) { return -inverse_power(v, m).imag(); }

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> source_coeffs(const FishPose& pose, const Density& flux,
                                                          const Vec2& z, int order, double xi) {
  if (order < 1) throw ValidationError("source_coeffs: order must be at least 1");
  const Boundary& body = pose.body;
  if (flux.size() != body.size()) throw ValidationError("source_coeffs: flux does not match the body");
  if (winding_number(body.nodes, z) != 0) throw ValidationError("source_coeffs: z lies inside the fish body");

  Eigen::VectorXcd a(order), b(order);
  const Vec2 d = z - pose.dipole_position;
  for (int m = 1; m <= order; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const cplx w = inverse_power(d, m + 1);
    const double phi1 = w.real(), psi1 = -w.imag();
    a[m - 1] = sign / two_pi * pose.dipole_moment.dot(Vec2(phi1, psi1));
    b[m - 1] = sign / two_pi * pose.dipole_moment.dot(Vec2(psi1, -phi1));
  }
  for (int j = 0; j < body.size(); ++j) {
    const Vec2 y = body.nodes[j] - z;
    if (y.squaredNorm() == 0.0) throw ValidationError("source_coeffs: z lies on the fish body");
    const cplx wpsi = body.weights[j] * flux[j];
    cplx power = inverse_power(y, 1);
    const cplx step = power;
    for (int m = 1; m <= order; ++m) {
      const cplx next = power * step;  // y^{-(m+1)}
      a[m - 1] -= power.real() / (two_pi * m) * wpsi;
      b[m - 1] -= -power.imag() / (two_pi * m) * wpsi;
      if (xi != 0.0) {
        const Vec2& nu = body.normals[j];
        const double phi1 = next.real(), psi1 = -next.imag();
        a[m - 1] -= xi / two_pi * nu.dot(Vec2(phi1, psi1)) * wpsi;
        b[m - 1] -= xi / two_pi * nu.dot(Vec2(psi1, -phi1)) * wpsi;
      }
      power = next;
    }
  }
  return {a, b};
}

SourceCoefficients source_coeffs(const FishPose& pose, const SkinData& sd, const Vec2& z, int order) {
  SourceCoefficients c;
  c.order = order;
  auto [a, b] = source_coeffs(pose, sd.flux, z, order, sd.xi);
  c.a = a.transpose();
  c.b = b.transpose();
  return c;
}

SourceCoefficients source_coeffs(const std::vector<FishPose>& poses, const Eigen::MatrixXcd& flux,
                                 const Vec2& z, int order, double xi) {
  if (flux.rows() != static_cast<Eigen::Index>(poses.size()))
    throw ValidationError("source_coeffs: one flux row per pose expected");
  SourceCoefficients c;
  c.order = order;
  c.a.resize(poses.size(), order);
  c.b.resize(poses.size(), order);
  for (size_t s = 0; s < poses.size(); ++s) {
    auto [a, b] = source_coeffs(poses[s], flux.row(s).transpose(), z, order, xi);
    c.a.row(s) = a.transpose();
    c.b.row(s) = b.transpose();
  }
  return c;
}

LinearForwardMap::LinearForwardMap(const std::vector<FishPose>& poses, const SourceCoefficients& coeffs,
                                   const Vec2& z, int order)
    : order_(order) {
  if (order < 1) throw ValidationError("linear forward map: order must be at least 1");
  if (poses.empty()) throw ValidationError("linear forward map: no poses");
  if (coeffs.order < order || coeffs.a.rows() != static_cast<Eigen::Index>(poses.size()))
    throw ValidationError("linear forward map: source coefficients do not cover the order");
  positions_ = static_cast<int>(poses.size());
  receptors_ = static_cast<int>(poses.front().receptors.size());
  for (int m = 1; m <= order; ++m)
    for (int n = 1; m + n <= order + 1; ++n) blocks_.push_back({m, n});

  matrix_.resize(positions_ * receptors_, 4 * static_cast<int>(blocks_.size()));
  for (int s = 0; s < positions_; ++s) {
    if (static_cast<int>(poses[s].receptors.size()) != receptors_)
      throw ValidationError("linear forward map: inconsistent receptor counts");
    for (int r = 0; r < receptors_; ++r) {
      const Vec2 x = poses[s].receptors[r] - z;
      if (x.norm() == 0.0) throw ValidationError("linear forward map: receptor coincides with z");
      const int row = s * receptors_ + r;
      for (size_t k = 0; k < blocks_.size(); ++k) {
        const auto [m, n] = blocks_[k];
        const cplx w = inverse_power(x, n);
        const double g1 = -w.real() / (two_pi * n);
        const double g2 = w.imag() / (two_pi * n);
        const cplx am = coeffs.a(s, m - 1), bm = coeffs.b(s, m - 1);
        matrix_(row, 4 * k + 0) = am * g1;
        matrix_(row, 4 * k + 1) = am * g2;
        matrix_(row, 4 * k + 2) = bm * g1;
        matrix_(row, 4 * k + 3) = bm * g2;
      }
    }
  }
  pseudo_inverse_ = pseudo_inverse(matrix_, singular_values_, rank_, cutoff);
  if (rank_ == 0) throw NumericalError("linear forward map is identically zero");
}

Eigen::MatrixXcd LinearForwardMap::apply(const CgptMatrix& m) const {
  if (m.order() < order_) throw ValidationError("apply: CGPT order below the map order");
  Eigen::VectorXcd x(unknowns());
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const CMat2& blk = m.block(blocks_[k].first, blocks_[k].second);
    x.segment<4>(4 * k) << blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1);
  }
  const Eigen::VectorXcd q = matrix_ * x;
  return q.reshaped<Eigen::RowMajor>(positions_, receptors_);
}

CgptMatrix LinearForwardMap::recover(const Eigen::MatrixXcd& q) const {
  if (q.rows() != positions_ || q.cols() != receptors_)
    throw ValidationError("recover: data matrix has dimensions " + std::to_string(q.rows()) + "x" +
                          std::to_string(q.cols()) + ", expected " + std::to_string(positions_) + "x" +
                          std::to_string(receptors_));
  const Eigen::VectorXcd x = pseudo_inverse_ * q.reshaped<Eigen::RowMajor>();
  CgptMatrix out(order_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    CMat2& blk = out.block(blocks_[k].first, blocks_[k].second);
    blk << x[4 * k], x[4 * k + 1], x[4 * k + 2], x[4 * k + 3];
  }
  return out;
}

LinearForwardMap assemble_operator(const std::vector<FishPose>& poses, const SourceCoefficients& coeffs,
                                   const Vec2& z, int order) {
  return LinearForwardMap(poses, coeffs, z, order);
}

CgptMatrix recover_cgpt(const Eigen::MatrixXcd& q, const LinearForwardMap& map) { return map.recover(q); }

std::vector<LinearForwardMap> assemble_operators(const MeasurementSet& data, int order) {
  data.validate();
  std::vector<LinearForwardMap> maps;
  maps.reserve(data.frequency_count());
  for (int f = 0; f < data.frequency_count(); ++f) {
    const SourceCoefficients c = source_coeffs(data.poses, data.flux[f], data.target_location, order, data.xi);
    maps.emplace_back(data.poses, c, data.target_location, order);
  }
  return maps;
}

std::vector<CgptMatrix> recover_cgpt(const MeasurementSet& data, int order) {
  const std::vector<LinearForwardMap> maps = assemble_operators(data, order);
  std::vector<CgptMatrix> out;
  for (int f = 0; f < data.frequency_count(); ++f) out.push_back(maps[f].recover(data.q[f]));
  return out;
}

// ---------------------------------------------------------------------------

ImaginaryPtFit::ImaginaryPtFit(const std::vector<FishPose>& poses, const std::vector<Vec2>& background_gradient,
                               const Vec2& z) {
  if (poses.empty()) throw ValidationError("imaginary PT fit: no poses");
  if (background_gradient.size() != poses.size())
    throw ValidationError("imaginary PT fit: one background gradient per pose expected");
  positions_ = static_cast<int>(poses.size());
  receptors_ = static_cast<int>(poses.front().receptors.size());
  double gmax = 0.0;
  for (const Vec2& g : background_gradient) gmax = std::max(gmax, g.norm());

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(positions_ * receptors_, 4);
  for (int s = 0; s < positions_; ++s) {
    const Vec2& g = background_gradient[s];
    if (!(g.norm() > 1e-12 * gmax)) {
      excluded_.push_back(s);
      continue;
    }
    for (int r = 0; r < receptors_; ++r) {
      const Vec2 x = poses[s].receptors[r] - z;
      const Vec2& nu = poses[s].receptor_normals[r];
      const double r2 = x.squaredNorm();
      // grad_z of nu . (x - z) / (2 pi |x - z|^2)
      const Vec2 h = -nu / (two_pi * r2) + nu.dot(x) * x / (pi * r2 * r2);
      const int row = s * receptors_ + r;
      design(row, 0) = g.x() * h.x();
      design(row, 1) = g.x() * h.y();
      design(row, 2) = g.y() * h.x();
      design(row, 3) = g.y() * h.y();
    }
  }
  if (static_cast<int>(excluded_.size()) == positions_)
    throw NumericalError("imaginary PT fit: background gradient vanishes at every pose");
  pseudo_inverse_ = design.completeOrthogonalDecomposition().pseudoInverse();
}

Mat2 ImaginaryPtFit::fit(const Eigen::MatrixXd& y) const {
  if (y.rows() != positions_ || y.cols() != receptors_)
    throw ValidationError("imaginary PT fit: data matrix has wrong dimensions");
  const Eigen::Vector4d x = pseudo_inverse_ * y.reshaped<Eigen::RowMajor>();
  Mat2 out;
  out << x[0], x[1], x[2], x[3];
  return out;
}

Mat2 ImaginaryPtFit::fit_symmetric(const Eigen::MatrixXd& y, double* asymmetry) const {
  const Mat2 raw = fit(y);
  if (asymmetry) *asymmetry = raw.norm() > 0.0 ? (raw - raw.transpose()).norm() / raw.norm() : 0.0;
  return 0.5 * (raw + raw.transpose());
}

BackgroundField background_field(const std::vector<FishPose>& poses, const Vec2& z, double xi) {
  if (poses.empty()) throw ValidationError("background_field: empty pose list");
  BackgroundField out;
  out.flux.resize(static_cast<Eigen::Index>(poses.size()), poses.front().body.size());
  out.gradient.resize(poses.size());
  detail::parallel_for(static_cast<int>(poses.size()), [&](int s) {
    const SkinData sd = ForwardSolver(poses[s], xi).background();
    out.flux.row(s) = sd.flux.real().transpose();
    out.gradient[s] = compute_H(sd, poses[s], {z}).front().gradient.real();
  });
  return out;
}

std::vector<Vec2> background_gradients(const std::vector<FishPose>& poses, const Vec2& z, double xi) {
  std::vector<Vec2> out(poses.size());
  detail::parallel_for(static_cast<int>(poses.size()), [&](int s) {
    const SkinData sd = ForwardSolver(poses[s], xi).background();
    out[s] = compute_H(sd, poses[s], {z}).front().gradient.real();
  });
  return out;
}

std::vector<Eigen::MatrixXd> postprocessed_imaginary_data(const std::vector<FishPose>& poses,
                                                          const std::vector<Eigen::MatrixXcd>& flux,
                                                          const Eigen::MatrixXd& background, double xi) {
  if (poses.empty()) throw ValidationError("postprocessed data: no poses");
  const int s_count = static_cast<int>(poses.size());
  const int n = poses.front().body.size();
  const int receptors = static_cast<int>(poses.front().receptors.size());
  if (background.rows() != s_count || background.cols() != n)
    throw ValidationError("postprocessed data: background flux does not match the poses");
  for (const Eigen::MatrixXcd& f : flux)
    if (f.rows() != s_count || f.cols() != n)
      throw ValidationError("postprocessed data: flux does not match the poses");

  std::vector<Eigen::MatrixXd> y(flux.size(), Eigen::MatrixXd(s_count, receptors));
  detail::parallel_for(s_count, [&](int s) {
    const FishPose& pose = poses[s];
    const Eigen::MatrixXcd op = (trig_interpolation_matrix(n, pose.receptor_params) *
                                 postprocessing_matrix(pose.body, xi)).cast<cplx>();
    for (size_t f = 0; f < flux.size(); ++f) {
      const Eigen::VectorXcd diff = flux[f].row(s).transpose() - background.row(s).transpose().cast<cplx>();
      y[f].row(s) = (op * diff).imag().transpose();
    }
  });
  return y;
}

Mat2 recover_pt_imag(const Eigen::MatrixXd& postprocessed, const std::vector<FishPose>& poses,
                     const std::vector<Vec2>& background_gradient, const Vec2& z) {
  return ImaginaryPtFit(poses, background_gradient, z).fit_symmetric(postprocessed);
}

}  // namespace esense
