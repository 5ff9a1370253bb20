#pragma once

#include <functional>
#include <string>
#include <vector>

#include "esense/types.hpp"

namespace esense {

/// A closed C^2 curve sampled at N equispaced parameter values
/// t_j = param_period * j / N, positively (counter-clockwise) oriented.
///
/// Every quadrature in the library is the periodic trapezoidal rule in this
/// parameter, so `weights[j] = |x'(t_j)| * param_period / N` carries the
/// arc-length element.
struct Boundary {
  std::vector<Vec2> nodes;
  std::vector<Vec2> tangents;  // unit, direction of increasing parameter
  std::vector<Vec2> normals;   // unit, outward
  std::vector<double> weights;
  std::vector<double> curvature;  // positive where the curve is locally convex
  double param_period = two_pi;

  int size() const { return static_cast<int>(nodes.size()); }
  double param(int j) const { return param_period * j / size(); }
  double param_step() const { return param_period / size(); }
  /// |dx/dt| at node j.
  double speed(int j) const { return weights[j] / param_step(); }

  double perimeter() const;
  /// Enclosed area from the boundary integral (1/2) \oint x . nu dsigma.
  double area() const;
  /// Area centroid.
  Vec2 centroid() const;
  /// Axis-aligned bounding box as (min, max).
  std::pair<Vec2, Vec2> bounding_box() const;
};

/// Position and first two parameter derivatives of a curve.
struct CurvePoint {
  Vec2 position;
  Vec2 d1;
  Vec2 d2;
};

using Parametrization = std::function<CurvePoint(double)>;

/// Samples a 2*pi-periodic parametrization at n equispaced points. The
/// parametrization must already be counter-clockwise.
Boundary sample_curve(const Parametrization& curve, int n_nodes);

/// Wraps `curve` so that it is counter-clockwise (reverses the parameter
/// when the signed area is negative).
Parametrization orient_counter_clockwise(Parametrization curve);

/// Arc-length table for a periodic parametrization. Supports s(t) and the
/// inverse t(s) to near machine precision.
class ArcLength {
 public:
  explicit ArcLength(Parametrization curve, int panels = 2048);

  double total() const { return cumulative_.back(); }
  double length_at(double t) const;
  /// Parameter value with arc length `s` from t = 0 (s taken modulo the
  /// perimeter).
  double param_at(double s) const;

 private:
  double panel_integral(double a, double b) const;

  Parametrization curve_;
  int panels_;
  std::vector<double> cumulative_;
};

enum class ShapeKind { disk, ellipse, rectangle, square, triangle, letter_a, letter_e, custom };

/// Parses a shape name ("disk", "ellipse", "rectangle", "square", "triangle",
/// "A", "E", "custom"). Throws ValidationError listing valid names otherwise.
ShapeKind parse_shape_kind(const std::string& name);
std::string shape_kind_name(ShapeKind kind);

/// Size parameters by kind:
///   disk: a = radius
///   ellipse: a, b = semi-axes
///   rectangle: a = width, b = height
///   square, triangle (equilateral): a = side
///   letters: a = diameter after rescaling
///   custom: a = scale factor applied to the file coordinates
/// `rounding` is the corner radius in length units; 0 selects 5% of the
/// shape diameter. Smooth kinds ignore it.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::disk;
  double a = 1.0;
  double b = 1.0;
  double rounding = 0.0;
  std::string file;  // custom polyline path

  bool operator==(const ShapeSpec&) const = default;
};

/// Builds the boundary of a shape centered at its area centroid.
Boundary make_shape(const ShapeSpec& spec, int n_nodes);

/// Smooth parametrization of the shape, centered as in make_shape.
Parametrization shape_parametrization(const ShapeSpec& spec);

/// Maps x -> shift + scale * R(angle) x.
Boundary transform(const Boundary& b, double scale, double angle, const Vec2& shift);

/// Smooth trigonometric-polynomial curve obtained by rounding the corners
/// of a simple polygon with circular arcs of radius `rounding` and then
/// mollifying the arc-length parametrization with a narrow Gaussian so the
/// result is C-infinity. Rejects self-intersecting polygons.
Parametrization rounded_polygon(std::vector<Vec2> vertices, double rounding);

/// Reads a custom polyline: one "x y" pair per line, implicitly closed.
std::vector<Vec2> read_polyline(const std::string& path);

/// True if any two non-adjacent edges of the closed polygon intersect.
bool polygon_self_intersects(const std::vector<Vec2>& vertices);
double polygon_area(const std::vector<Vec2>& vertices);

/// Number of times the closed polygon winds around p (ray casting).
int winding_number(const std::vector<Vec2>& polygon, const Vec2& p);

// ---------------------------------------------------------------------------
// Fish

enum class FishKind { ellipse, twisted };

FishKind parse_fish_kind(const std::string& name);
std::string fish_kind_name(FishKind kind);

/// One position of the fish: body, receptors on the skin and the electric
/// organ modeled as a point dipole.
struct FishPose {
  int index = 0;
  double angle = 0.0;  // angular position of the body center on the orbit
  Boundary body;
  std::vector<Vec2> receptors;
  std::vector<Vec2> receptor_normals;   // outward unit normals at the receptors
  std::vector<double> receptor_params;  // body parameter of each receptor
  Vec2 dipole_position = Vec2::Zero();
  Vec2 dipole_moment = Vec2::UnitX();
};

struct TrajectoryOptions {
  FishKind kind = FishKind::twisted;
  int positions = 20;
  double orbit_radius = 1.0;
  double aperture = two_pi;
  int receptors = 128;
  int body_nodes = 512;
};

/// Poses equally spaced in angle over the aperture: pose s sits at angle
/// aperture * s / S on the orbit circle centered at the origin.
///
/// The straight body is an ellipse with semi-axes (1, 0.2) centered on the
/// orbit with its major axis tangent to it. The twisted body is an ellipse
/// with semi-axes (1.8, 0.2) whose major axis is bent along the orbit
/// circle. The dipole sits at the middle of the body's major axis with a
/// unit moment along it (counter-clockwise). Receptors are uniform in arc
/// length, starting from the body parameter t = 0.
std::vector<FishPose> fish_trajectory(const TrajectoryOptions& options);

/// Parametrization of the fish body at a given orbit angle.
Parametrization fish_body_parametrization(FishKind kind, double orbit_radius, double angle);

}  // namespace esense
