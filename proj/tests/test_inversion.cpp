#include <doctest.h>

#include <cmath>
#include <random>

#include "esense/classifier.hpp"
#include "esense/forward.hpp"
#include "esense/inversion.hpp"

using namespace esense;

namespace {

std::vector<FishPose> poses(FishKind kind, int count, int receptors = 64, int nodes = 256,
                            double aperture = two_pi) {
  TrajectoryOptions o;
  o.kind = kind;
  o.positions = count;
  o.receptors = receptors;
  o.body_nodes = nodes;
  o.aperture = aperture;
  return fish_trajectory(o);
}

Boundary scaled_shape(const std::string& name, double delta, double angle = 0.0, int nodes = 256) {
  return transform(make_shape(dictionary_shape(name).shape, nodes), delta, angle, Vec2::Zero());
}

double cgpt_distance(const CgptMatrix& a, const CgptMatrix& b, int order) {
  double s = 0.0;
  for (int m = 1; m <= order; ++m)
    for (int n = 1; m + n <= order + 1; ++n) s += (a.block(m, n) - b.block(m, n)).squaredNorm();
  return std::sqrt(s);
}

double cgpt_size(const CgptMatrix& a, int order) {
  double s = 0.0;
  for (int m = 1; m <= order; ++m)
    for (int n = 1; m + n <= order + 1; ++n) s += a.block(m, n).squaredNorm();
  return std::sqrt(s);
}

// Derivatives of a field of order 1..3 at z by central differences of its
// gradient. Entry m-1 lists d^alpha for alpha in multi_indices(m).
using GradientFn = std::function<Eigen::Vector2cd(const Vec2&)>;

std::vector<std::vector<cplx>> fd_derivatives(const GradientFn& grad, const Vec2& z, double h) {
  const Vec2 e1(h, 0.0), e2(0.0, h);
  const Eigen::Vector2cd g0 = grad(z);
  const Eigen::Vector2cd gx = (grad(z + e1) - grad(z - e1)) / (2.0 * h);
  const Eigen::Vector2cd gy = (grad(z + e2) - grad(z - e2)) / (2.0 * h);
  const Eigen::Vector2cd gxx = (grad(z + e1) - 2.0 * g0 + grad(z - e1)) / (h * h);
  const Eigen::Vector2cd gyy = (grad(z + e2) - 2.0 * g0 + grad(z - e2)) / (h * h);
  return {{g0[0], g0[1]},
          {gx[0], gx[1], gy[1]},
          {gxx[0], gxx[1], gyy[0], gyy[1]}};
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

void check_lemma(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const GradientFn& grad, const Vec2& z) {
  const auto d = fd_derivatives(grad, z, 1e-3);
  for (int m = 1; m <= 3; ++m) {
    const HarmonicCoeffs hc = harmonic_coeffs(m);
    for (size_t k = 0; k < hc.indices.size(); ++k) {
      const MultiIndex& alpha = hc.indices[k];
      const cplx reference = d[m - 1][k] / (factorial(alpha.i) * factorial(alpha.j));
      const cplx model = a[m - 1] * hc.a[k] + b[m - 1] * hc.b[k];
      CAPTURE(m);
      CAPTURE(k);
      CHECK(std::abs(model - reference) <= 1e-5 * std::abs(reference));
    }
  }
}

}  // namespace

TEST_CASE("source coefficients reproduce the derivatives of H") {
  const auto ps = poses(FishKind::twisted, 3, 32, 256);
  const Vec2 z(0.1, -0.05);
  const Boundary d = scaled_shape("ellipse", 0.3, 0.4);
  for (const FishPose& p : ps) {
    SUBCASE("pure dipole") {
      const auto [a, b] = source_coeffs(p, Density::Zero(p.body.size()), z, 3);
      check_lemma(a, b, [&](const Vec2& x) {
        return Eigen::Vector2cd(dipole_field(p.dipole_moment, p.dipole_position, x).gradient.cast<cplx>());
      }, z);
    }
    SUBCASE("background with and without skin") {
      for (double xi : {0.0, 0.05}) {
        const SkinData sd = ForwardSolver(p, xi).background();
        const SourceCoefficients c = source_coeffs(p, sd, z, 3);
        check_lemma(c.a.row(0).transpose(), c.b.row(0).transpose(),
                    [&](const Vec2& x) { return compute_H(sd, p, {x}).front().gradient; }, z);
      }
    }
    SUBCASE("complex flux in the presence of the target") {
      const SkinData sd = ForwardSolver(p, d).solve(Contrast{2.0, 1.0, 4.0});
      REQUIRE(sd.flux.imag().norm() > 0.0);
      const SourceCoefficients c = source_coeffs(p, sd, z, 3);
      check_lemma(c.a.row(0).transpose(), c.b.row(0).transpose(),
                  [&](const Vec2& x) { return compute_H(sd, p, {x}).front().gradient; }, z);
    }
  }
  CHECK_THROWS_AS(source_coeffs(ps[0], Density::Zero(ps[0].body.size()), ps[0].dipole_position, 2),
                  ValidationError);
}

TEST_CASE("forward map block structure") {
  const auto ps = poses(FishKind::twisted, 4, 32);
  const Eigen::MatrixXcd flux = background_flux(ps).cast<cplx>();
  const SourceCoefficients c = source_coeffs(ps, flux, Vec2::Zero(), 3);
  const LinearForwardMap k1(ps, c, Vec2::Zero(), 1);
  CHECK(k1.unknowns() == 4);
  CHECK(k1.rows() == 4 * 32);
  const LinearForwardMap k2(ps, c, Vec2::Zero(), 2);
  CHECK(k2.unknowns() == 12);
  REQUIRE(k2.blocks().size() == 3);
  CHECK(k2.blocks()[0] == std::pair<int, int>(1, 1));
  CHECK(k2.blocks()[1] == std::pair<int, int>(1, 2));
  CHECK(k2.blocks()[2] == std::pair<int, int>(2, 1));
  CHECK_THROWS_AS(LinearForwardMap(ps, source_coeffs(ps, flux, Vec2::Zero(), 1), Vec2::Zero(), 2),
                  ValidationError);
  CHECK_THROWS_AS(LinearForwardMap(ps, c, ps[0].receptors[3], 1), ValidationError);
}

TEST_CASE("receptors collinear with z make the map rank deficient") {
  FishPose p = poses(FishKind::ellipse, 1, 8)[0];
  const Vec2 z = Vec2::Zero();
  const SkinData sd = ForwardSolver(p).background();
  for (size_t r = 0; r < p.receptors.size(); ++r) p.receptors[r] = Vec2(2.0 + 0.1 * r, 0.0);
  const SourceCoefficients c = source_coeffs(p, sd, z, 1);
  const LinearForwardMap map({p}, c, z, 1);
  CHECK(map.rank() < map.unknowns());
}

TEST_CASE("synthetic data generated by the map are recovered exactly") {
  const auto ps = poses(FishKind::twisted, 20, 128, 256);
  const Eigen::MatrixXcd flux = background_flux(ps).cast<cplx>();
  const SourceCoefficients c = source_coeffs(ps, flux, Vec2::Zero(), 2);
  const LinearForwardMap map(ps, c, Vec2::Zero(), 2);
  REQUIRE(map.rank() == map.unknowns());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  CgptMatrix truth(2);
  for (const auto& [m, n] : map.blocks())
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) truth.block(m, n)(i, j) = cplx(g(rng), g(rng));
  const CgptMatrix got = map.recover(map.apply(truth));
  CHECK(cgpt_distance(got, truth, 2) <= 1e-10 * cgpt_size(truth, 2));
  CHECK_THROWS_AS(map.recover(Eigen::MatrixXcd::Zero(19, 128)), ValidationError);
}

TEST_CASE("recovered first-order block of a disk at the reference setup") {
  const auto ps = poses(FishKind::twisted, 20, 128, 512);
  const Contrast contrast{2.0, 1.0, 1.0};
  const Boundary d = scaled_shape("disk", 0.3);
  const MeasurementSet data = data_matrix(ps, d, {contrast}, Vec2::Zero());
  const CgptMatrix got = recover_cgpt(data, 2).front();
  const CgptMatrix truth = cgpt(d, contrast.lambda(), 2);
  CHECK((got.first_order() - truth.first_order()).norm() <= 0.05 * truth.first_order().norm());
}

TEST_CASE("the map applied to exact CGPTs reproduces the data up to the remainder") {
  const auto ps = poses(FishKind::twisted, 12, 64, 256);
  const Contrast contrast{2.0, 1.0, 3.0};
  std::vector<double> residuals;
  for (double delta : {0.3, 0.15}) {
    const Boundary d = scaled_shape("ellipse", delta, 0.5);
    const MeasurementSet data = data_matrix(ps, d, {contrast}, Vec2::Zero());
    const LinearForwardMap map = assemble_operators(data, 2).front();
    const Eigen::MatrixXcd predicted = map.apply(cgpt(d, contrast.lambda(), 2));
    residuals.push_back((predicted - data.q[0]).norm() / data.q[0].norm());
  }
  CAPTURE(residuals[0]);
  CAPTURE(residuals[1]);
  CHECK(residuals[0] <= 0.05);
  CHECK(residuals[1] <= 0.6 * residuals[0]);
}

TEST_CASE("noise amplification is bounded by the smallest retained singular value") {
  const auto ps = poses(FishKind::twisted, 10, 64, 256);
  const Contrast contrast{2.0, 1.0, 2.0};
  const MeasurementSet data = data_matrix(ps, scaled_shape("triangle", 0.3), {contrast}, Vec2::Zero());
  const LinearForwardMap map = assemble_operators(data, 2).front();
  const Eigen::VectorXd sv = map.singular_values();
  const double smallest = sv[map.rank() - 1];
  const CgptMatrix clean = map.recover(data.q[0]);
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd noisy = add_noise(data.q[0], 0.01, rng);
    const double change = cgpt_distance(map.recover(noisy), clean, 2);
    const double bound = (noisy - data.q[0]).norm() / smallest;
    CHECK(change <= bound * (1.0 + 1e-9));
    worst = std::max(worst, change / bound);
  }
  MESSAGE("largest observed fraction of the amplification bound: " << worst);
}

TEST_CASE("recovery is equivariant under a rotation of the whole rig") {
  // Pose s + 1 of a 10-pose orbit is pose s rotated by one step.
  const auto all = poses(FishKind::twisted, 10, 64, 256);
  const std::vector<FishPose> first(all.begin(), all.end() - 1), second(all.begin() + 1, all.end());
  const double step = two_pi / 10;
  const Contrast contrast{2.0, 1.0, 3.0};
  const CgptMatrix a =
      recover_cgpt(data_matrix(first, scaled_shape("triangle", 0.3, 0.2), {contrast}, Vec2::Zero()), 2).front();
  const CgptMatrix b =
      recover_cgpt(data_matrix(second, scaled_shape("triangle", 0.3, 0.2 + step), {contrast}, Vec2::Zero()), 2)
          .front();
  for (int m = 1; m <= 2; ++m)
    for (int n = 1; m + n <= 3; ++n) {
      const CMat2 expected =
          rotation(m * step).cast<cplx>() * a.block(m, n) * rotation(n * step).transpose().cast<cplx>();
      CHECK((b.block(m, n) - expected).norm() <= 1e-6 * cgpt_size(a, 2));
    }
}

TEST_CASE("multi-frequency recovery equals independent single-frequency recoveries") {
  const auto ps = poses(FishKind::twisted, 6, 32, 256);
  std::vector<Contrast> cs;
  for (double w : {1.0, 4.0, 9.0}) cs.push_back(Contrast{2.0, 1.0, w});
  const MeasurementSet data = data_matrix(ps, scaled_shape("ellipse", 0.3), cs, Vec2::Zero());
  const std::vector<CgptMatrix> all = recover_cgpt(data, 2);
  REQUIRE(all.size() == 3);
  for (int f = 0; f < 3; ++f) {
    const CgptMatrix single = recover_cgpt(data.select_frequencies({f}), 2).front();
    CHECK(cgpt_distance(single, all[f], 2) <= 1e-14 * cgpt_size(all[f], 2));
  }
}

TEST_CASE("imaginary PT from postprocessed skin data") {
  const auto ps = poses(FishKind::twisted, 20, 128, 512);
  const Vec2 z = Vec2::Zero();
  const BackgroundField bg = background_field(ps, z);
  const Boundary d = scaled_shape("ellipse", 0.3, 0.6);

  SUBCASE("real contrast gives no imaginary part") {
    const Contrast real{2.0, 0.0, 5.0};
    const MeasurementSet data = data_matrix(ps, d, {real}, z);
    const auto y = postprocessed_imaginary_data(ps, data.flux, bg.flux);
    const Mat2 x = recover_pt_imag(y.front(), ps, bg.gradient, z);
    CHECK(x.norm() <= 1e-10 * first_order_pt(d, real).norm());
  }

  SUBCASE("matches the imaginary part of the exact PT") {
    const Contrast c{2.0, 1.0, 5.0};
    const MeasurementSet data = data_matrix(ps, d, {c}, z);
    const auto y = postprocessed_imaginary_data(ps, data.flux, bg.flux);
    const ImaginaryPtFit fit(ps, bg.gradient, z);
    double asymmetry = 0.0;
    const Mat2 x = fit.fit_symmetric(y.front(), &asymmetry);
    const Mat2 truth = first_order_pt(d, c).imag();
    CAPTURE((x - truth).norm() / truth.norm());
    CHECK((x - truth).norm() <= 0.1 * truth.norm());
    CHECK(asymmetry <= 0.1);
    CHECK(fit.excluded_poses().empty());
  }

  CHECK_THROWS_AS(ImaginaryPtFit(ps, std::vector<Vec2>(ps.size(), Vec2::Zero()), z), NumericalError);
}
