// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "esense/classifier.hpp"
#include "esense/features.hpp"
#include "esense/forward.hpp"
#include "esense/gpt.hpp"
#include "esense/inversion.hpp"

using namespace esense;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, double seconds) {
  std::printf("%s criterion %d: %s [%.1f s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class F>
void run(int id, const std::string& what, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    std::printf("  exception: %s\n", e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, pass, what, s);
}

std::vector<FishPose> reference_poses(FishKind kind = FishKind::twisted) {
  TrajectoryOptions o;
  o.kind = kind;
  return fish_trajectory(o);
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Shared state of the Monte Carlo criteria.
struct Experiment {
  Dictionary dictionary;
  std::vector<MeasurementSet> clean;
  BackgroundField background;
};

const Experiment& experiment() {
  static const Experiment e = [] {
    Experiment x;
    x.dictionary = build_dictionary(default_dictionary_shapes(), DictionaryOptions{});
    const auto poses = reference_poses();
    const SimulationSetup setup;
    for (const DictionaryEntry& entry : x.dictionary.entries)
      x.clean.push_back(simulate_entry(entry, x.dictionary.frequencies, poses, setup));
    x.background = background_field(poses, Vec2::Zero());
    return x;
  }();
  return e;
}

std::vector<StabilityRow> sweep(FeatureFamily family, const std::vector<double>& levels, bool single_frequency) {
  const Experiment& e = experiment();
  const Dictionary d = single_frequency ? e.dictionary.select_frequencies({0}) : e.dictionary;
  std::vector<RecoveryPipeline> pipes;
  for (const MeasurementSet& m : e.clean)
    pipes.emplace_back(single_frequency ? m.select_frequencies({0}) : m, family, default_recovery_order(family),
                       &e.background);
  StabilityOptions o;
  o.family = family;
  o.noise_levels = levels;
  o.trials = 1000;
  o.seed = 1;
  o.stop_at_chance = false;
  return stability_sweep(d, pipes, o);
}

void print_curve(const char* name, const std::vector<StabilityRow>& rows, const std::vector<double>& levels) {
  std::printf("  %s:", name);
  for (double l : levels) std::printf(" %.3g->%.3f", l, mean_rate(rows, l));
  std::printf("\n");
}

const std::vector<double> kGrid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};

const std::vector<StabilityRow>& sv_curve() {
  static const std::vector<StabilityRow> rows = sweep(FeatureFamily::sv, kGrid, false);
  return rows;
}

// ---------------------------------------------------------------------------

bool criterion1() {
  const Boundary disk = make_shape({ShapeKind::disk, 1.0, 1.0, 0.0, ""}, 256);
  const CMat2 pt = first_order_pt(disk, Contrast{2.0, 0.0, 1.0});
  const CMat2 expected = (2.0 * pi / 3.0) * CMat2::Identity();
  const double rel = (pt - expected).norm() / expected.norm();
  std::printf("  relative error %.3e\n", rel);
  return rel <= 1e-6;
}

bool criterion2() {
  double worst_scaling = 0.0, worst_rotation = 0.0;
  std::vector<MultiIndex> idx;
  for (int m = 1; m <= 2; ++m)
    for (const MultiIndex& a : multi_indices(m)) idx.push_back(a);
  for (const DictionaryShape& s : default_dictionary_shapes()) {
    const Boundary b = make_shape(s.shape, 256);
    const Contrast c{s.sigma, s.epsilon, 3.0};
    const cplx lambda = c.lambda();
    double norm = 0.0;
    std::vector<cplx> base;
    for (const MultiIndex& a : idx)
      for (const MultiIndex& g : idx) {
        base.push_back(gpt(b, lambda, a, g));
        norm = std::max(norm, std::abs(base.back()));
      }
    for (double delta : {0.3, 1.7}) {
      const Boundary scaled = transform(b, delta, 0.0, Vec2::Zero());
      size_t k = 0;
      for (const MultiIndex& a : idx)
        for (const MultiIndex& g : idx) {
          const double f = std::pow(delta, a.order() + g.order());
          const double err = std::abs(gpt(scaled, lambda, a, g) - f * base[k++]) / (f * norm);
          worst_scaling = std::max(worst_scaling, err);
        }
    }
    const CMat2 pt = first_order_pt(b, c);
    for (double theta : {0.4, 1.9, 4.0}) {
      const CMat2 rotated = first_order_pt(transform(b, 1.0, theta, Vec2::Zero()), c);
      const CMat2 expected = rotation(theta).cast<cplx>() * pt * rotation(theta).transpose().cast<cplx>();
      worst_rotation = std::max(worst_rotation, (rotated - expected).norm() / pt.norm());
    }
  }
  std::printf("  worst relative error: scaling %.3e, rotation %.3e\n", worst_scaling, worst_rotation);
  return worst_scaling <= 1e-8 && worst_rotation <= 1e-8;
}

// Order-2 expansion of u - H at the receptors built from GPTs, derivatives
// of H at z and derivatives of the Green function.
bool criterion3() {
  const auto poses = reference_poses();
  const Contrast c{2.0, 1.0, 1.0};
  const int order = 2;
  const Vec2 z = Vec2::Zero();
  std::vector<double> deltas{0.05, 0.1, 0.2}, errors;
  for (double delta : deltas) {
    const Boundary d =
        transform(make_shape(dictionary_shape("ellipse").shape, 256), delta, 0.35, z);
    const cplx lambda = c.lambda();
    std::vector<std::pair<MultiIndex, MultiIndex>> pairs;
    std::vector<cplx> moments;
    for (int m = 1; m <= order; ++m)
      for (const MultiIndex& a : multi_indices(m))
        for (int n = 1; n <= order - m + 1; ++n)
          for (const MultiIndex& b : multi_indices(n)) {
            pairs.push_back({a, b});
            moments.push_back(gpt(d, lambda, a, b));
          }
    double err2 = 0.0;
    for (const FishPose& p : poses) {
      const SkinData sd = ForwardSolver(p, d).solve(c);
      auto grad = [&](const Vec2& x) { return compute_H(sd, p, {x}).front().gradient; };
      const double h = 1e-4;
      const Eigen::Vector2cd g0 = grad(z);
      const Eigen::Vector2cd gx = (grad(z + Vec2(h, 0)) - grad(z - Vec2(h, 0))) / (2 * h);
      const Eigen::Vector2cd gy = (grad(z + Vec2(0, h)) - grad(z - Vec2(0, h))) / (2 * h);
      auto dh = [&](const MultiIndex& a) -> cplx {
        if (a.order() == 1) return a.i == 1 ? g0[0] : g0[1];
        if (a.i == 2) return gx[0];
        if (a.i == 1) return gx[1];
        return gy[1];
      };
      for (size_t r = 0; r < p.receptors.size(); ++r) {
        const Vec2 x = p.receptors[r] - z;
        const Vec2 g1 = green_gradient(x);
        const Mat2 g2 = green_hessian(x);
        auto dg = [&](const MultiIndex& b) -> double {
          if (b.order() == 1) return b.i == 1 ? g1[0] : g1[1];
          if (b.i == 2) return g2(0, 0);
          if (b.i == 1) return g2(0, 1);
          return g2(1, 1);
        };
        cplx model = 0.0;
        for (size_t k = 0; k < pairs.size(); ++k) {
          const auto& [a, b] = pairs[k];
          const double sign = (b.order() % 2 == 0) ? 1.0 : -1.0;
          const double fact = factorial(a.i) * factorial(a.j) * factorial(b.i) * factorial(b.j);
          model += sign / fact * dh(a) * moments[k] * dg(b);
        }
        err2 += std::norm(sd.perturbation[r] - model);
      }
    }
    errors.push_back(std::sqrt(err2));
  }
  // Least-squares slope of log(error) against log(delta).
  double mx = 0.0, my = 0.0;
  for (size_t k = 0; k < deltas.size(); ++k) {
    mx += std::log(deltas[k]) / deltas.size();
    my += std::log(errors[k]) / deltas.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (size_t k = 0; k < deltas.size(); ++k) {
    sxy += (std::log(deltas[k]) - mx) * (std::log(errors[k]) - my);
    sxx += std::pow(std::log(deltas[k]) - mx, 2);
  }
  const double slope = sxy / sxx;
  std::printf("  remainder norms %.3e %.3e %.3e, slope %.3f (required >= 3.7)\n", errors[0], errors[1], errors[2],
              slope);
  return slope >= 3.7;
}

bool criterion4() {
  const auto poses = reference_poses();
  // Synthetic data from the map itself.
  const Eigen::MatrixXcd flux = background_flux(poses).cast<cplx>();
  const LinearForwardMap map(poses, source_coeffs(poses, flux, Vec2::Zero(), 2), Vec2::Zero(), 2);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  CgptMatrix truth(2);
  double tnorm = 0.0, dnorm = 0.0;
  for (const auto& [m, n] : map.blocks())
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) truth.block(m, n)(i, j) = cplx(g(rng), g(rng));
  const CgptMatrix got = map.recover(map.apply(truth));
  for (const auto& [m, n] : map.blocks()) {
    tnorm += truth.block(m, n).squaredNorm();
    dnorm += (got.block(m, n) - truth.block(m, n)).squaredNorm();
  }
  const double synthetic = std::sqrt(dnorm / tnorm);

  // BEM data for every dictionary shape at the reference setup.
  double worst = 0.0;
  std::string worst_name;
  for (const DictionaryShape& s : default_dictionary_shapes()) {
    const Boundary d = transform(make_shape(s.shape, 256), 0.3, 0.0, Vec2::Zero());
    std::vector<Contrast> cs;
    for (int f = 1; f <= 10; ++f) cs.push_back(Contrast{s.sigma, s.epsilon, double(f)});
    const MeasurementSet data = data_matrix(poses, d, cs, Vec2::Zero());
    const std::vector<CgptMatrix> rec = recover_cgpt(data, 2);
    for (int f = 0; f < 10; ++f) {
      const CMat2 exact = first_order_pt(d, cs[f]);
      const double rel = (rec[f].first_order() - exact).norm() / exact.norm();
      if (rel > worst) {
        worst = rel;
        worst_name = s.name + " at omega " + std::to_string(f + 1);
      }
    }
  }
  std::printf("  synthetic recovery error %.3e (required <= 1e-10)\n", synthetic);
  std::printf("  worst first-order block error %.4f for %s (required <= 0.05)\n", worst, worst_name.c_str());
  return synthetic <= 1e-10 && worst <= 0.05;
}

bool criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> delta(0.5, 2.0), angle(0.0, two_pi), shift(-2.0, 2.0);
  const cplx lambda = Contrast{2.0, 1.0, 1.0}.lambda();
  double worst = 0.0;
  for (const DictionaryShape& s : default_dictionary_shapes()) {
    const Boundary b = make_shape(s.shape, 256);
    const ShapeDescriptors ref = shape_descriptors(cgpt(b, lambda, 2));
    for (int t = 0; t < 100; ++t) {
      const Boundary moved = transform(b, delta(rng), angle(rng), Vec2(shift(rng), shift(rng)));
      const ShapeDescriptors d = shape_descriptors(cgpt(moved, lambda, 2));
      worst = std::max(worst, std::sqrt((d.i1 - ref.i1).squaredNorm() + (d.i2 - ref.i2).squaredNorm()));
    }
  }
  std::printf("  worst descriptor distance over 800 transforms %.3e\n", worst);
  return worst <= 1e-6;
}

bool criterion6() {
  const auto& rows = sv_curve();
  print_curve("sv", rows, kGrid);
  const double rate = mean_rate(rows, 1.25);
  std::printf("  detection at 125%% noise: %.3f (required >= 0.90 - 0.05)\n", rate);
  return rate >= 0.85;
}

bool criterion7() {
  const std::vector<double> levels{0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25};
  const auto sd = sweep(FeatureFamily::sd, levels, true);
  const auto& sv = sv_curve();
  print_curve("sd (single frequency)", sd, levels);
  bool lower = false;
  for (double l : levels) {
    bool common = false;
    for (double g : kGrid) common = common || g == l;
    if (!common) continue;
    const double a = mean_rate(sv, l), b = mean_rate(sd, l);
    std::printf("  common level %.3g: sv %.3f, sd %.3f\n", l, a, b);
    if (a >= 0.9 && b < a) lower = true;
  }
  double floor_level = -1.0;
  for (double l : levels)
    if (mean_rate(sd, l) <= 0.125) {
      floor_level = l;
      break;
    }
  if (floor_level >= 0.0)
    std::printf("  sd reaches the 12.5%% floor at noise %.3g (%s 25%%)\n", floor_level,
                floor_level < 0.25 ? "below" : "not below");
  else
    std::printf("  sd does not reach the 12.5%% floor by 25%% noise (reported, not asserted)\n");
  return lower;
}

bool criterion8() {
  const Experiment& e = experiment();
  const int ellipse = e.dictionary.index_of("ellipse");
  const MeasurementSet& data = e.clean[ellipse];
  const DictionaryEntry& entry = e.dictionary.entries[ellipse];
  const auto y = postprocessed_imaginary_data(data.poses, data.flux, e.background.flux);
  const Boundary d = transform(make_shape(entry.shape, 256), 0.3, 0.0, Vec2::Zero());
  double worst = 0.0;
  for (int f = 0; f < data.frequency_count(); ++f) {
    const Mat2 got = recover_pt_imag(y[f], data.poses, e.background.gradient, Vec2::Zero());
    const Mat2 exact = first_order_pt(d, entry_contrast(entry, data.frequencies[f])).imag();
    worst = std::max(worst, (got - exact).norm() / exact.norm());
  }
  std::printf("  worst Im PT error over the frequency grid %.4f (required <= 0.10)\n", worst);

  const auto pt = sweep(FeatureFamily::pt_imag, kGrid, false);
  const auto& sv = sv_curve();
  print_curve("pt-imag", pt, kGrid);
  double gap = 0.0;
  for (double l : kGrid) gap = std::max(gap, std::abs(mean_rate(pt, l) - mean_rate(sv, l)));
  std::printf("  largest gap to the sv curve %.3f (required <= 0.10)\n", gap);
  return worst <= 0.1 && gap <= 0.1;
}

}  // namespace

int main() {
  run(1, "disk polarization tensor equals (2 pi / 3) I", criterion1);
  run(2, "GPT scaling and PT rotation laws on all shapes", criterion2);
  run(3, "order-2 expansion remainder decays with slope >= 3.7", criterion3);
  run(4, "exact synthetic recovery and first-order blocks within 5%", criterion4);
  run(5, "descriptor invariance under similarity transforms", criterion5);
  run(6, "sv detection at 125% noise, twisted fish, 1000 trials", criterion6);
  run(7, "single-frequency descriptors degrade faster than sv", criterion7);
  run(8, "background elimination: Im PT and stability curve", criterion8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
