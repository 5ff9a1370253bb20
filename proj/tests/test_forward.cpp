#include <doctest.h>

#include <cmath>

#include "esense/forward.hpp"
#include "esense/inversion.hpp"

using namespace esense;

namespace {

std::vector<FishPose> poses(FishKind kind, int count, int receptors = 64, int nodes = 256) {
  TrajectoryOptions o;
  o.kind = kind;
  o.positions = count;
  o.receptors = receptors;
  o.body_nodes = nodes;
  return fish_trajectory(o);
}

Boundary target(ShapeKind kind, double a, double b, double delta, double angle = 0.0, Vec2 z = Vec2::Zero(),
                int nodes = 128) {
  return transform(make_shape({kind, a, b, 0.0, ""}, nodes), delta, angle, z);
}

double extrapolate(const std::vector<double>& h, const std::vector<double>& v) {
  double out = 0.0;
  for (size_t i = 0; i < h.size(); ++i) {
    double w = 1.0;
    for (size_t k = 0; k < h.size(); ++k)
      if (k != i) w *= -h[k] / (h[i] - h[k]);
    out += w * v[i];
  }
  return out;
}

}  // namespace

TEST_CASE("dipole field") {
  const FieldSample a = dipole_field(Vec2(1, 0), Vec2::Zero(), Vec2(1, 0));
  CHECK(a.value == doctest::Approx(1.0 / two_pi).epsilon(1e-14));
  CHECK(std::abs(dipole_field(Vec2(0, 1), Vec2::Zero(), Vec2(1, 0)).value) < 1e-16);
  const Vec2 p(0.3, -0.8), s(0.1, 0.2), x(1.1, -0.4);
  const double h = 1e-7;
  const FieldSample f = dipole_field(p, s, x);
  for (int k = 0; k < 2; ++k) {
    Vec2 e = Vec2::Zero();
    e[k] = h;
    const double fd = (dipole_field(p, s, x + e).value - dipole_field(p, s, x - e).value) / (2 * h);
    CHECK(std::abs(fd - f.gradient[k]) <= 1e-6 * f.gradient.norm());
  }
}

TEST_CASE("a target without contrast leaves no trace") {
  const auto ps = poses(FishKind::twisted, 3);
  const Boundary d = target(ShapeKind::ellipse, 0.5, 0.25, 0.3);
  for (const FishPose& p : ps) {
    const SkinData sd = ForwardSolver(p, d).solve(Contrast{1.0, 0.0, 1.0});
    CHECK(sd.perturbation.cwiseAbs().maxCoeff() <= 1e-10);
    const SkinData bg = ForwardSolver(p).background();
    CHECK(bg.perturbation.cwiseAbs().maxCoeff() <= 1e-10);
    // Without a target u and H coincide at the receptors.
    CHECK((bg.u - bg.h).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("skin flux is neutral and real at zero permittivity") {
  const auto ps = poses(FishKind::ellipse, 2);
  const Boundary d = target(ShapeKind::triangle, 1.0, 1.0, 0.3, 0.2);
  for (const FishPose& p : ps) {
    const SkinData sd = ForwardSolver(p, d).solve(Contrast{3.0, 0.0, 5.0});
    cplx net = 0.0;
    double total = 0.0;
    for (int j = 0; j < p.body.size(); ++j) {
      net += p.body.weights[j] * sd.flux[j];
      total += p.body.weights[j] * std::abs(sd.flux[j]);
    }
    CHECK(std::abs(net) <= 1e-8 * total);
    CHECK(sd.flux.imag().cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(sd.u.imag().cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(sd.perturbation.imag().cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("perturbation scales like the target area") {
  const auto ps = poses(FishKind::twisted, 1);
  const Contrast c{2.0, 1.0, 2.0};
  std::vector<double> logd, logq;
  for (double delta : {0.05, 0.1, 0.2}) {
    const SkinData sd = ForwardSolver(ps[0], target(ShapeKind::ellipse, 0.5, 0.25, delta)).solve(c);
    logd.push_back(std::log(delta));
    logq.push_back(std::log(sd.perturbation.norm()));
  }
  const double slope = (logq[2] - logq[0]) / (logd[2] - logd[0]);
  CHECK(std::abs(slope - 2.0) <= 0.1);
}

TEST_CASE("u - H equals the single layer of the target density") {
  // Independent evaluation of u - H = S_D (lambda I - K*_D)^{-1}[dH/dnu].
  const auto ps = poses(FishKind::twisted, 2);
  const Boundary d = target(ShapeKind::ellipse, 0.5, 0.25, 0.3, 0.4, Vec2(0.05, -0.02));
  const Contrast c{2.0, 1.0, 3.0};
  for (const FishPose& p : ps) {
    const SkinData sd = ForwardSolver(p, d).solve(c);
    CHECK((sd.u - sd.h - sd.perturbation).cwiseAbs().maxCoeff() <= 1e-14);
    const std::vector<HSample> hs = compute_H(sd, p, d.nodes);
    Density dhdn(d.size());
    for (int j = 0; j < d.size(); ++j) dhdn[j] = d.normals[j].cast<cplx>().transpose() * hs[j].gradient;
    const Density phi = solve_resolvent(d, c.lambda(), dhdn);
    const Eigen::VectorXcd expected = single_layer(d, phi, p.receptors);
    CHECK((expected - sd.perturbation).norm() <= 1e-8 * sd.perturbation.norm());
  }
}

TEST_CASE("H is the dipole plus the skin single layer when xi = 0") {
  const auto ps = poses(FishKind::ellipse, 1);
  const Boundary d = target(ShapeKind::disk, 0.5, 0.5, 0.3);
  const SkinData sd = ForwardSolver(ps[0], d).solve(Contrast{2.0, 1.0, 1.0});
  const std::vector<Vec2> pts{Vec2(0.0, 0.0), Vec2(0.1, -0.4), Vec2(-2.0, 1.0)};
  const auto hs = compute_H(sd, ps[0], pts);
  const Eigen::VectorXcd sl = single_layer(ps[0].body, sd.flux, pts);
  for (size_t i = 0; i < pts.size(); ++i) {
    const double p = dipole_field(ps[0].dipole_moment, ps[0].dipole_position, pts[i]).value;
    CHECK(std::abs(hs[i].value - (p + sl[i])) <= 1e-12);
  }
}

TEST_CASE("transmission conditions on the skin") {
  // u = p + S[psi] - xi D[psi] must satisfy du/dnu = 0 inside, du/dnu = psi
  // outside and u+ - u- = xi psi. Limits are taken on a finely resampled
  // body with the flux interpolated to it. The normal derivative of the
  // double layer uses the density minus its value at the base point, which
  // is exact because D[1] is piecewise constant off the curve.
  const double xi = 0.05;
  const auto ps = poses(FishKind::ellipse, 1, 16, 256);
  const FishPose& p = ps[0];
  const SkinData sd = ForwardSolver(p, xi).background();
  const Parametrization curve = fish_body_parametrization(FishKind::ellipse, 1.0, p.angle);
  const Boundary fine = sample_curve(curve, 32768);
  std::vector<double> fine_params(fine.size());
  for (int j = 0; j < fine.size(); ++j) fine_params[j] = fine.param(j);
  const Density psi = trig_interpolation_matrix(p.body.size(), fine_params).cast<cplx>() * sd.flux;

  auto u = [&](const Vec2& x) {
    const double dip = dipole_field(p.dipole_moment, p.dipole_position, x).value;
    return dip + single_layer(fine, psi, {x})[0] - xi * double_layer(fine, psi, {x})[0];
  };
  auto dudn = [&](const Vec2& x, const Vec2& nu, cplx base) {
    const double dip = dipole_field(p.dipole_moment, p.dipole_position, x).gradient.dot(nu);
    const Density shifted = (psi.array() - base).matrix();
    return dip + (single_layer_normal_matrix(fine, {x}, {nu}) * psi)[0] -
           xi * (double_layer_normal_matrix(fine, {x}, {nu}) * shifted)[0];
  };
  const std::vector<double> hs{0.002, 0.0015, 0.001, 0.0005};
  const double scale = sd.flux.cwiseAbs().maxCoeff();
  for (int j = 0; j < p.body.size(); j += 23) {
    const Vec2 x = p.body.nodes[j], nu = p.body.normals[j];
    std::vector<double> up, um, dp, dm;
    for (double h : hs) {
      up.push_back(u(x + h * nu).real());
      um.push_back(u(x - h * nu).real());
      dp.push_back(dudn(x + h * nu, nu, sd.flux[j]).real());
      dm.push_back(dudn(x - h * nu, nu, sd.flux[j]).real());
    }
    CHECK(std::abs(extrapolate(hs, dm)) <= 1e-6 * scale);
    CHECK(std::abs(extrapolate(hs, dp) - sd.flux[j].real()) <= 1e-6 * scale);
    CHECK(std::abs(extrapolate(hs, up) - extrapolate(hs, um) - xi * sd.flux[j].real()) <= 1e-6 * scale);
  }
}

TEST_CASE("data matrix layout") {
  const auto ps = poses(FishKind::twisted, 4, 32);
  const Boundary d = target(ShapeKind::ellipse, 0.5, 0.25, 0.3);
  std::vector<Contrast> cs;
  for (int f = 1; f <= 10; ++f) cs.push_back(Contrast{2.0, 1.0, double(f)});
  const MeasurementSet m = data_matrix(ps, d, cs, Vec2::Zero());
  REQUIRE(m.q.size() == 10);
  for (int f = 0; f < 10; ++f) {
    CHECK(m.frequencies[f] == double(f + 1));
    CHECK(m.q[f].rows() == 4);
    CHECK(m.q[f].cols() == 32);
    CHECK(m.flux[f].cols() == ps[0].body.size());
  }
  CHECK_THROWS_AS(data_matrix({}, d, cs, Vec2::Zero()), ValidationError);
  // Each frequency equals an independent single-pose solve.
  const SkinData sd = ForwardSolver(ps[2], d).solve(cs[6]);
  CHECK((m.q[6].row(2).transpose() - sd.perturbation).norm() <= 1e-12 * sd.perturbation.norm());
}

TEST_CASE("data are equivariant under a rigid rotation of rig and target") {
  // Rotating the target by one pose step relabels the poses.
  TrajectoryOptions o;
  o.positions = 10;
  o.receptors = 32;
  o.body_nodes = 256;
  const auto ps = fish_trajectory(o);
  const double step = two_pi / 10;
  const std::vector<Contrast> cs{Contrast{2.0, 1.0, 3.0}};
  const MeasurementSet a = data_matrix(ps, target(ShapeKind::triangle, 1.0, 1.0, 0.3, 0.0), cs, Vec2::Zero());
  const MeasurementSet b = data_matrix(ps, target(ShapeKind::triangle, 1.0, 1.0, 0.3, step), cs, Vec2::Zero());
  const double scale = a.q[0].cwiseAbs().maxCoeff();
  for (int s = 0; s < 9; ++s) CHECK((b.q[0].row(s + 1) - a.q[0].row(s)).cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("forward solver rejects overlapping geometry") {
  const auto ps = poses(FishKind::ellipse, 1);
  const Boundary inside = target(ShapeKind::disk, 0.1, 0.1, 1.0, 0.0, ps[0].dipole_position);
  CHECK_THROWS_AS(ForwardSolver(ps[0], inside), ValidationError);
  CHECK_THROWS_AS(ForwardSolver(ps[0], -1.0), ValidationError);
}

TEST_CASE("postprocessed data match the dipolar approximation") {
  // P[du/dnu - dU/dnu] ~ grad U(z)^T M grad_z dG/dnu_x(x - z); the remainder
  // is of higher order in the target size.
  const auto ps = poses(FishKind::twisted, 3, 64, 256);
  const Contrast c{2.0, 1.0, 5.0};
  const Vec2 z = Vec2::Zero();
  const std::vector<Vec2> grad_u = background_gradients(ps, z);
  std::vector<double> errors;
  for (double delta : {0.2, 0.1}) {
    const Boundary d = target(ShapeKind::ellipse, 0.5, 0.25, delta, 0.3);
    const CMat2 m = first_order_pt(d, c);
    double err = 0.0, norm = 0.0, im_err = 0.0, im_norm = 0.0;
    for (size_t s = 0; s < ps.size(); ++s) {
      const SkinData sd = ForwardSolver(ps[s], d).solve(c);
      const SkinData bg = ForwardSolver(ps[s]).background();
      const Eigen::VectorXcd post = postprocess_at_receptors(ps[s], sd.flux - bg.flux);
      CHECK(postprocess_at_receptors(ps[s], Density::Zero(ps[s].body.size())).norm() == 0.0);
      for (size_t r = 0; r < ps[s].receptors.size(); ++r) {
        const Vec2 x = ps[s].receptors[r], nu = ps[s].receptor_normals[r], rr = x - z;
        const double r2 = rr.squaredNorm();
        const Vec2 h = -nu / (two_pi * r2) + nu.dot(rr) * rr / (pi * r2 * r2);
        const cplx model = grad_u[s].cast<cplx>().dot(m * h.cast<cplx>());
        err += std::norm(post[r] - model);
        norm += std::norm(model);
        im_err += std::pow(post[r].imag() - grad_u[s].dot(m.imag() * h), 2);
        im_norm += std::pow(grad_u[s].dot(m.imag() * h), 2);
      }
    }
    errors.push_back(std::sqrt(err / norm));
    CHECK(std::sqrt(im_err / im_norm) < 0.1);
  }
  CHECK(errors[0] < 0.1);
  CHECK(errors[1] < errors[0] / 3.0);
}
