#include "esense/forward.hpp"

#include <cmath>

#include "parallel.hpp"

namespace esense {

FieldSample dipole_field(const Vec2& moment, const Vec2& source, const Vec2& x) {
  const Vec2 r = x - source;
  if (r.squaredNorm() == 0.0) throw std::domain_error("dipole_field: evaluation at the source");
  return {moment.dot(green_gradient(r)), green_hessian(r) * moment};
}

namespace {

bool inside(const Boundary& b, const Vec2& p) { return winding_number(b.nodes, p) != 0; }

// Solves (lambda I - H) y = rhs for upper Hessenberg H by Gaussian
// elimination with adjacent-row pivoting.
Eigen::VectorXcd hessenberg_shifted_solve(const Eigen::MatrixXd& h, cplx lambda,
                                          Eigen::VectorXcd rhs) {
  const int n = static_cast<int>(h.rows());
  // Work on the transpose so that row operations are contiguous.
  Eigen::MatrixXcd at = -h.transpose().cast<cplx>();
  at.diagonal().array() += lambda;
  const double scale = at.cwiseAbs().maxCoeff();
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(at(k, k + 1)) > std::abs(at(k, k))) {
      at.col(k).segment(k, n - k).swap(at.col(k + 1).segment(k, n - k));
      std::swap(rhs[k], rhs[k + 1]);
    }
    if (std::abs(at(k, k)) <= 1e-14 * scale)
      throw NumericalError("coupled system is numerically singular", std::abs(at(k, k)) / scale);
    const cplx l = at(k, k + 1) / at(k, k);
    at.col(k + 1).segment(k, n - k) -= l * at.col(k).segment(k, n - k);
    rhs[k + 1] -= l * rhs[k];
  }
  if (std::abs(at(n - 1, n - 1)) <= 1e-14 * scale)
    throw NumericalError("coupled system is numerically singular",
                         std::abs(at(n - 1, n - 1)) / scale);
  return at.transpose().triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace

ForwardSolver::ForwardSolver(const FishPose& pose, double xi) : pose_(pose), xi_(xi) {
  if (xi < 0.0) throw ValidationError("skin parameter xi must be non-negative");
  const Boundary& body = pose_.body;
  const int n = body.size();

  // Postprocessing operator plus a rank-one term that selects the mean-zero flux.
  Eigen::MatrixXd a = postprocessing_matrix(body, xi);
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) w[j] = body.weights[j];
  a.rowwise() += w.transpose();
  body_lu_.compute(a);
  const double rcond = body_lu_.rcond();
  if (!(rcond > 1e-13)) throw NumericalError("skin operator is numerically singular", rcond);

  source_flux_.resize(n);
  for (int j = 0; j < n; ++j)
    source_flux_[j] =
        dipole_field(pose_.dipole_moment, pose_.dipole_position, body.nodes[j]).gradient.dot(body.normals[j]);
  body_solve_source_ = body_lu_.solve(source_flux_);

  const int r = static_cast<int>(pose_.receptors.size());
  receptor_single_layer_ = single_layer_on_curve(body, pose_.receptor_params, pose_.receptors);
  if (xi != 0.0) {
    Eigen::MatrixXd k = double_layer_on_curve(body);
    k.diagonal().array() -= 0.5;
    receptor_double_layer_ = trig_interpolation_matrix(n, pose_.receptor_params) * k;
  }
  receptor_dipole_.resize(r);
  for (int i = 0; i < r; ++i)
    receptor_dipole_[i] = dipole_field(pose_.dipole_moment, pose_.dipole_position, pose_.receptors[i]).value;
}

ForwardSolver::ForwardSolver(const FishPose& pose, const Boundary& target, double xi)
    : ForwardSolver(pose, xi) {
  const Boundary& body = pose_.body;
  for (const Vec2& y : target.nodes)
    if (inside(body, y)) throw ValidationError("target must lie outside the fish body");
  for (const Vec2& x : body.nodes)
    if (inside(target, x)) throw ValidationError("target must lie outside the fish body");
  target_ = target;

  // Off-diagonal blocks of the coupled system.
  const Eigen::MatrixXd b = -single_layer_normal_matrix(target, body.nodes, body.normals);
  Eigen::MatrixXd c = -single_layer_normal_matrix(body, target.nodes, target.normals);
  if (xi_ != 0.0) c += xi_ * double_layer_normal_matrix(body, target.nodes, target.normals);

  body_solve_coupling_ = body_lu_.solve(b);
  Eigen::MatrixXd schur = neumann_poincare(target);
  schur.noalias() += c * body_solve_coupling_;

  Eigen::VectorXd target_source(target.size());
  for (int j = 0; j < target.size(); ++j)
    target_source[j] = dipole_field(pose_.dipole_moment, pose_.dipole_position, target.nodes[j])
                           .gradient.dot(target.normals[j]);
  const Eigen::VectorXd rhs = target_source - c * body_solve_source_;

  Eigen::HessenbergDecomposition<Eigen::MatrixXd> hd(schur);
  hessenberg_ = hd.matrixH();
  hessenberg_basis_ = hd.matrixQ();
  reduced_rhs_ = hessenberg_basis_.transpose() * rhs;
  receptor_target_ = single_layer_matrix(target, pose_.receptors);
}

SkinData ForwardSolver::assemble(const Density& flux, const Density& target_density) const {
  SkinData sd;
  sd.pose = pose_.index;
  sd.xi = xi_;
  sd.flux = flux;
  sd.target_density = target_density;
  sd.h = receptor_dipole_.cast<cplx>() + receptor_single_layer_.cast<cplx>() * flux;
  if (xi_ != 0.0) sd.h -= xi_ * (receptor_double_layer_.cast<cplx>() * flux);
  if (target_density.size() > 0)
    sd.perturbation = receptor_target_.cast<cplx>() * target_density;
  else
    sd.perturbation = Eigen::VectorXcd::Zero(sd.h.size());
  sd.u = sd.h + sd.perturbation;
  return sd;
}

SkinData ForwardSolver::background() const {
  return assemble(body_solve_source_.cast<cplx>(), Density());
}

SkinData ForwardSolver::solve(const Contrast& contrast) const {
  if (contrast.k() == cplx(1.0, 0.0)) {
    if (!has_target()) return background();
    return assemble(body_solve_source_.cast<cplx>(), Density::Zero(target_->size()));
  }
  return solve_lambda(contrast.lambda());
}

SkinData ForwardSolver::solve_lambda(cplx lambda) const {
  if (!has_target()) throw ValidationError("solve_lambda needs a target");
  const Eigen::VectorXcd y = hessenberg_shifted_solve(hessenberg_, lambda, reduced_rhs_.cast<cplx>());
  const Density phi = hessenberg_basis_.cast<cplx>() * y;
  const Density psi = body_solve_source_.cast<cplx>() - body_solve_coupling_.cast<cplx>() * phi;
  return assemble(psi, phi);
}

SkinData solve_forward(const FishPose& pose, const std::optional<Target>& target, double xi) {
  if (!target) return ForwardSolver(pose, xi).background();
  return ForwardSolver(pose, target->boundary, xi).solve(target->contrast);
}

std::vector<HSample> compute_H(const SkinData& sd, const FishPose& pose,
                                   const std::vector<Vec2>& points) {
  const Boundary& body = pose.body;
  if (sd.flux.size() != body.size()) throw ValidationError("compute_H: flux does not match the body");
  const double spacing = body.perimeter() / body.size();
  std::vector<HSample> out(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec2& x = points[i];
    FieldSample f = dipole_field(pose.dipole_moment, pose.dipole_position, x);
    cplx value = f.value;
    Eigen::Vector2cd grad = f.gradient.cast<cplx>();
    for (int j = 0; j < body.size(); ++j) {
      const Vec2 r = x - body.nodes[j];
      if (r.norm() < 1e-3 * spacing) throw ValidationError("compute_H: point on the fish body");
      const cplx wpsi = body.weights[j] * sd.flux[j];
      value += green(r) * wpsi;
      grad += green_gradient(r).cast<cplx>() * wpsi;
      if (sd.xi != 0.0) {
        // dG/dnu_y(x - y) = -grad G(x - y) . nu_y
        value -= sd.xi * (-green_gradient(r).dot(body.normals[j])) * wpsi;
        grad -= sd.xi * (-green_hessian(r) * body.normals[j]).cast<cplx>() * wpsi;
      }
    }
    out[i] = {value, grad};
  }
  return out;
}

void MeasurementSet::validate() const {
  if (poses.empty()) throw ValidationError("measurement set has no poses");
  if (frequencies.empty()) throw ValidationError("measurement set has no frequencies");
  if (static_cast<int>(q.size()) != frequency_count() || static_cast<int>(flux.size()) != frequency_count())
    throw ValidationError("measurement set: one data matrix per frequency expected");
  const int r = receptors();
  for (const FishPose& p : poses)
    if (static_cast<int>(p.receptors.size()) != r)
      throw ValidationError("measurement set: inconsistent receptor counts across poses");
  for (int f = 0; f < frequency_count(); ++f) {
    if (q[f].rows() != positions() || q[f].cols() != r)
      throw ValidationError("measurement set: data matrix " + std::to_string(f) + " has wrong dimensions");
    if (flux[f].rows() != positions() || flux[f].cols() != poses.front().body.size())
      throw ValidationError("measurement set: flux matrix " + std::to_string(f) + " has wrong dimensions");
  }
}

MeasurementSet MeasurementSet::select_frequencies(const std::vector<int>& indices) const {
  MeasurementSet out;
  out.poses = poses;
  out.target_location = target_location;
  out.xi = xi;
  for (int f : indices) {
    if (f < 0 || f >= frequency_count()) throw ValidationError("select_frequencies: index out of range");
    out.frequencies.push_back(frequencies[f]);
    out.q.push_back(q[f]);
    out.flux.push_back(flux[f]);
  }
  return out;
}

MeasurementSet data_matrix(const std::vector<FishPose>& poses, const Boundary& target,
                           const std::vector<Contrast>& contrasts, const Vec2& target_location,
                           double xi) {
  if (poses.empty()) throw ValidationError("data_matrix: empty pose list");
  if (contrasts.empty()) throw ValidationError("data_matrix: no frequencies");
  MeasurementSet m;
  m.poses = poses;
  m.target_location = target_location;
  m.xi = xi;
  const int s_count = static_cast<int>(poses.size());
  const int r = static_cast<int>(poses.front().receptors.size());
  const int n = poses.front().body.size();
  for (const FishPose& p : poses)
    if (static_cast<int>(p.receptors.size()) != r || p.body.size() != n)
      throw ValidationError("data_matrix: poses must share receptor and node counts");
  for (const Contrast& c : contrasts) {
    m.frequencies.push_back(c.omega);
    m.q.emplace_back(s_count, r);
    m.flux.emplace_back(s_count, n);
  }
  detail::parallel_for(s_count, [&](int s) {
    const ForwardSolver solver(poses[s], target, xi);
    for (size_t f = 0; f < contrasts.size(); ++f) {
      const SkinData sd = solver.solve(contrasts[f]);
      m.q[f].row(s) = sd.perturbation.transpose();
      m.flux[f].row(s) = sd.flux.transpose();
    }
  });
  return m;
}

Eigen::MatrixXd background_flux(const std::vector<FishPose>& poses, double xi) {
  if (poses.empty()) throw ValidationError("background_flux: empty pose list");
  Eigen::MatrixXd out(poses.size(), poses.front().body.size());
  detail::parallel_for(static_cast<int>(poses.size()), [&](int s) {
    out.row(s) = ForwardSolver(poses[s], xi).background().flux.real().transpose();
  });
  return out;
}

Eigen::MatrixXd postprocessing_matrix(const Boundary& body, double xi) {
  Eigen::MatrixXd a = -neumann_poincare(body);
  a.diagonal().array() += 0.5;
  if (xi != 0.0) a += xi * hypersingular(body);
  return a;
}

Density postprocess(const FishPose& pose, const Density& flux_difference, double xi) {
  if (flux_difference.size() != pose.body.size())
    throw ValidationError("postprocess: flux length does not match the body");
  return postprocessing_matrix(pose.body, xi).cast<cplx>() * flux_difference;
}

Eigen::VectorXcd postprocess_at_receptors(const FishPose& pose, const Density& flux_difference,
                                          double xi) {
  return trig_interpolation_matrix(pose.body.size(), pose.receptor_params).cast<cplx>() *
         postprocess(pose, flux_difference, xi);
}

}  // namespace esense
