#include "esense/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace esense {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> gl_nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

double Boundary::perimeter() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

double Boundary::area() const {
  double total = 0.0;
  for (int j = 0; j < size(); ++j) total += 0.5 * weights[j] * nodes[j].dot(normals[j]);
  return total;
}

Vec2 Boundary::centroid() const {
  Vec2 moment = Vec2::Zero();
  for (int j = 0; j < size(); ++j) {
    const Vec2& x = nodes[j];
    moment.x() += 0.5 * weights[j] * x.x() * x.x() * normals[j].x();
    moment.y() += 0.5 * weights[j] * x.y() * x.y() * normals[j].y();
  }
  return moment / area();
}

std::pair<Vec2, Vec2> Boundary::bounding_box() const {
  Vec2 lo = nodes.front(), hi = nodes.front();
  for (const Vec2& x : nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return {lo, hi};
}

Boundary sample_curve(const Parametrization& curve, int n_nodes) {
  if (n_nodes < 16) throw ValidationError("boundary needs at least 16 nodes");
  Boundary b;
  b.nodes.resize(n_nodes);
  b.tangents.resize(n_nodes);
  b.normals.resize(n_nodes);
  b.weights.resize(n_nodes);
  b.curvature.resize(n_nodes);
  const double h = two_pi / n_nodes;
  for (int j = 0; j < n_nodes; ++j) {
    const CurvePoint cp = curve(h * j);
    const double speed = cp.d1.norm();
    if (!(speed > 0.0)) throw ValidationError("degenerate parametrization (zero speed)");
    b.nodes[j] = cp.position;
    b.tangents[j] = cp.d1 / speed;
    b.normals[j] = Vec2(b.tangents[j].y(), -b.tangents[j].x());
    b.weights[j] = speed * h;
    b.curvature[j] = cross(cp.d1, cp.d2) / (speed * speed * speed);
  }
  return b;
}

Parametrization orient_counter_clockwise(Parametrization curve) {
  constexpr int n = 256;
  double signed_area = 0.0;
  for (int j = 0; j < n; ++j) {
    const CurvePoint cp = curve(two_pi * j / n);
    signed_area += 0.5 * cross(cp.position, cp.d1) * two_pi / n;
  }
  if (signed_area >= 0.0) return curve;
  return [curve = std::move(curve)](double t) {
    CurvePoint cp = curve(-t);
    cp.d1 = -cp.d1;
    return cp;
  };
}

ArcLength::ArcLength(Parametrization curve, int panels)
    : curve_(std::move(curve)), panels_(panels), cumulative_(panels + 1, 0.0) {
  const double h = two_pi / panels_;
  for (int k = 0; k < panels_; ++k)
    cumulative_[k + 1] = cumulative_[k] + panel_integral(h * k, h * (k + 1));
}

double ArcLength::panel_integral(double a, double b) const {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int q = 0; q < 8; ++q) sum += gl_weights[q] * curve_(mid + half * gl_nodes[q]).d1.norm();
  return sum * half;
}

double ArcLength::length_at(double t) const {
  const double turns = std::floor(t / two_pi);
  const double local = t - turns * two_pi;
  const double h = two_pi / panels_;
  const int k = std::min(panels_ - 1, static_cast<int>(local / h));
  return turns * total() + cumulative_[k] + panel_integral(h * k, local);
}

double ArcLength::param_at(double s) const {
  const double length = total();
  s = std::fmod(s, length);
  if (s < 0.0) s += length;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const int k = std::clamp(static_cast<int>(it - cumulative_.begin()) - 1, 0, panels_ - 1);
  const double h = two_pi / panels_;
  const double frac = (s - cumulative_[k]) / (cumulative_[k + 1] - cumulative_[k]);
  double t = h * (k + frac);
  for (int iter = 0; iter < 20; ++iter) {
    const double step = (length_at(t) - s) / curve_(t).d1.norm();
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return t;
}

Boundary transform(const Boundary& b, double scale, double angle, const Vec2& shift) {
  if (!(scale > 0.0)) throw ValidationError("transform: scale must be positive");
  if (scale == 1.0 && angle == 0.0 && shift.isZero(0.0)) return b;
  const Mat2 rot = rotation(angle);
  Boundary out = b;
  for (int j = 0; j < b.size(); ++j) {
    out.nodes[j] = shift + scale * (rot * b.nodes[j]);
    out.tangents[j] = rot * b.tangents[j];
    out.normals[j] = rot * b.normals[j];
    out.weights[j] = scale * b.weights[j];
    out.curvature[j] = b.curvature[j] / scale;
  }
  return out;
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "disk") return ShapeKind::disk;
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "rectangle") return ShapeKind::rectangle;
  if (name == "square") return ShapeKind::square;
  if (name == "triangle") return ShapeKind::triangle;
  if (name == "A" || name == "letterA") return ShapeKind::letter_a;
  if (name == "E" || name == "letterE") return ShapeKind::letter_e;
  if (name == "custom") return ShapeKind::custom;
  throw ValidationError("unknown shape '" + name +
                        "' (valid: disk, ellipse, rectangle, square, triangle, A, E, custom)");
}

std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::square: return "square";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::letter_a: return "A";
    case ShapeKind::letter_e: return "E";
    case ShapeKind::custom: return "custom";
  }
  return "?";
}

Boundary make_shape(const ShapeSpec& spec, int n_nodes) {
  if (n_nodes < 16) throw ValidationError("make_shape: n_nodes must be at least 16");
  return sample_curve(shape_parametrization(spec), n_nodes);
}

// ---------------------------------------------------------------------------
// Fish

FishKind parse_fish_kind(const std::string& name) {
  if (name == "ellipse" || name == "straight") return FishKind::ellipse;
  if (name == "twisted") return FishKind::twisted;
  throw ValidationError("unknown fish body '" + name + "' (valid: ellipse, twisted)");
}

std::string fish_kind_name(FishKind kind) {
  return kind == FishKind::ellipse ? "ellipse" : "twisted";
}

Parametrization fish_body_parametrization(FishKind kind, double orbit_radius, double angle) {
  const Vec2 radial(std::cos(angle), std::sin(angle));
  const Vec2 along = perp(radial);
  if (kind == FishKind::ellipse) {
    constexpr double a = 1.0, b = 0.2;
    const Vec2 center = orbit_radius * radial;
    // (along, radial) is left-handed; use -radial so the curve runs
    // counter-clockwise.
    return [=](double t) {
      const double c = std::cos(t), s = std::sin(t);
      return CurvePoint{center + a * c * along - b * s * radial, -a * s * along - b * c * radial,
                        -a * c * along + b * s * radial};
    };
  }
  constexpr double a = 1.8, b = 0.2;
  const double R = orbit_radius;
  // Straight ellipse (a cos t, b sin t) in (arc length along orbit, radial
  // offset) coordinates, wrapped onto the orbit circle. Parameter reversed
  // for counter-clockwise orientation.
  return [=](double t) {
    const double c = std::cos(-t), s = std::sin(-t);
    const double phi = angle + a * c / R, rho = R + b * s;
    const double dphi = a * s / R, drho = -b * c;    // d/dt
    const double ddphi = -a * c / R, ddrho = -b * s;  // d2/dt2
    const Vec2 e(std::cos(phi), std::sin(phi)), ep = perp(e);
    CurvePoint cp;
    cp.position = rho * e;
    cp.d1 = drho * e + rho * dphi * ep;
    cp.d2 = (ddrho - rho * dphi * dphi) * e + (2.0 * drho * dphi + rho * ddphi) * ep;
    return cp;
  };
}

std::vector<FishPose> fish_trajectory(const TrajectoryOptions& o) {
  if (o.positions < 1) throw ValidationError("fish_trajectory: need at least one position");
  if (!(o.aperture > 0.0)) throw ValidationError("fish_trajectory: aperture must be positive");
  if (!(o.orbit_radius > 0.0)) throw ValidationError("fish_trajectory: orbit radius must be positive");
  if (o.receptors < 1) throw ValidationError("fish_trajectory: need at least one receptor");
  if (o.body_nodes < 16) throw ValidationError("fish_trajectory: body needs at least 16 nodes");
  if (o.kind == FishKind::twisted && 1.8 / o.orbit_radius >= pi)
    throw ValidationError("fish_trajectory: orbit too small for the twisted body");

  // Every pose is a rotation of pose 0 about the origin, so the receptor
  // parameters are computed once.
  const Parametrization body0 = fish_body_parametrization(o.kind, o.orbit_radius, 0.0);
  const ArcLength arc(body0);
  std::vector<double> params(o.receptors);
  for (int r = 0; r < o.receptors; ++r) params[r] = arc.param_at(arc.total() * r / o.receptors);

  std::vector<FishPose> poses(o.positions);
  for (int s = 0; s < o.positions; ++s) {
    FishPose& pose = poses[s];
    pose.index = s;
    pose.angle = o.aperture * s / o.positions;
    const Parametrization body = fish_body_parametrization(o.kind, o.orbit_radius, pose.angle);
    pose.body = sample_curve(body, o.body_nodes);
    pose.receptor_params = params;
    pose.receptors.resize(o.receptors);
    pose.receptor_normals.resize(o.receptors);
    for (int r = 0; r < o.receptors; ++r) {
      const CurvePoint c = body(params[r]);
      const Vec2 t = c.d1.normalized();
      pose.receptors[r] = c.position;
      pose.receptor_normals[r] = Vec2(t.y(), -t.x());
    }
    const Vec2 radial(std::cos(pose.angle), std::sin(pose.angle));
    pose.dipole_position = o.orbit_radius * radial;
    pose.dipole_moment = perp(radial);
  }
  return poses;
}

}  // namespace esense
