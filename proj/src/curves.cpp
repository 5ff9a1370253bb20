// Shape parametrizations: analytic disks and ellipses, and corner-rounded
// polygons (rectangles, triangles, letters, custom polylines) represented
// as trigonometric polynomials.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "esense/geometry.hpp"

namespace esense {

namespace {

// z(t) = sum_k c_k e^{ikt}, k = -kmax..kmax, with z = x + iy.
struct FourierCurve {
  int kmax = 0;
  std::vector<cplx> coeffs;  // index k + kmax

  CurvePoint operator()(double t) const {
    cplx z = 0.0, dz = 0.0, ddz = 0.0;
    const cplx step = std::polar(1.0, t);
    cplx e_pos = 1.0;
    for (int k = 0; k <= kmax; ++k) {
      const cplx e_neg = std::conj(e_pos);
      const cplx cp = coeffs[kmax + k];
      z += cp * e_pos;
      dz += cplx(0.0, k) * cp * e_pos;
      ddz -= double(k) * k * cp * e_pos;
      if (k > 0) {
        const cplx cn = coeffs[kmax - k];
        z += cn * e_neg;
        dz += cplx(0.0, -k) * cn * e_neg;
        ddz -= double(k) * k * cn * e_neg;
      }
      e_pos *= step;
    }
    return {{z.real(), z.imag()}, {dz.real(), dz.imag()}, {ddz.real(), ddz.imag()}};
  }
};

Parametrization shifted(Parametrization curve, const Vec2& shift) {
  return [curve = std::move(curve), shift](double t) {
    CurvePoint cp = curve(t);
    cp.position += shift;
    return cp;
  };
}

double polygon_diameter(const std::vector<Vec2>& v) {
  double d = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
  return d;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1), d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1), d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

// Piecewise path of segments and circular arcs, sampled by arc length.
struct Piece {
  bool arc = false;
  Vec2 start, end;          // segment
  Vec2 center;              // arc
  double radius = 0, start_angle = 0, sweep = 0;
  double length = 0;

  Vec2 at(double s) const {
    if (!arc) return start + (end - start) * (s / length);
    const double phi = start_angle + sweep * (s / length);
    return center + radius * Vec2(std::cos(phi), std::sin(phi));
  }
};

// Polygon tables on [0,1]-ish boxes, counter-clockwise.
std::vector<Vec2> letter_e_vertices() {
  return {{0.0, 0.0},  {0.6, 0.0},  {0.6, 0.2},  {0.22, 0.2}, {0.22, 0.4}, {0.5, 0.4},
          {0.5, 0.6},  {0.22, 0.6}, {0.22, 0.8}, {0.6, 0.8},  {0.6, 1.0},  {0.0, 1.0}};
}

// Silhouette of an 'A' with a notch between the legs; the enclosed counter
// is omitted because the target must be simply connected.
std::vector<Vec2> letter_a_vertices() {
  return {{0.0, 0.0},  {0.22, 0.0}, {0.32, 0.3}, {0.68, 0.3},
          {0.78, 0.0}, {1.0, 0.0},  {0.6, 1.0},  {0.4, 1.0}};
}

std::vector<Vec2> scaled_to_diameter(std::vector<Vec2> v, double diameter) {
  const double factor = diameter / polygon_diameter(v);
  for (Vec2& p : v) p *= factor;
  return v;
}

}  // namespace

double polygon_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (size_t i = 0; i < v.size(); ++i) a += 0.5 * cross(v[i], v[(i + 1) % v.size()]);
  return a;
}

bool polygon_self_intersects(const std::vector<Vec2>& v) {
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return true;
    }
  }
  return false;
}

int winding_number(const std::vector<Vec2>& poly, const Vec2& p) {
  int wn = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross(b - a, p - a) > 0) ++wn;
    } else if (b.y() <= p.y() && cross(b - a, p - a) < 0) {
      --wn;
    }
  }
  return wn;
}

std::vector<Vec2> read_polyline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open polyline file '" + path + "'");
  std::vector<Vec2> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y))
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected 'x y'");
    pts.emplace_back(x, y);
  }
  if (pts.size() > 1 && (pts.front() - pts.back()).norm() == 0.0) pts.pop_back();
  if (pts.size() < 3) throw ValidationError("polyline '" + path + "' needs at least 3 points");
  return pts;
}

Parametrization rounded_polygon(std::vector<Vec2> v, double rounding) {
  if (v.size() < 3) throw ValidationError("polygon needs at least 3 vertices");
  if (!(rounding > 0.0)) throw ValidationError("corner rounding radius must be positive");
  if (polygon_self_intersects(v)) throw ValidationError("polygon is self-intersecting");
  const double area = polygon_area(v);
  if (area == 0.0) throw ValidationError("polygon has zero area");
  if (area < 0.0) std::reverse(v.begin(), v.end());
  const size_t n = v.size();

  // Corner arcs, shrunk where the adjacent edges are too short.
  struct Corner {
    Vec2 in_point, out_point;
    Piece arc;
    bool has_arc = false;
  };
  std::vector<Corner> corners(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec2& prev = v[(i + n - 1) % n];
    const Vec2& cur = v[i];
    const Vec2& next = v[(i + 1) % n];
    const Vec2 d_in = (cur - prev).normalized(), d_out = (next - cur).normalized();
    const double turn = std::atan2(cross(d_in, d_out), d_in.dot(d_out));
    Corner& c = corners[i];
    if (std::abs(turn) < 1e-12) {
      c.in_point = c.out_point = cur;
      continue;
    }
    const double half_tan = std::tan(0.5 * std::abs(turn));
    const double cut =
        std::min(rounding * half_tan, 0.45 * std::min((cur - prev).norm(), (next - cur).norm()));
    const double r = cut / half_tan;
    c.in_point = cur - cut * d_in;
    c.out_point = cur + cut * d_out;
    c.has_arc = true;
    c.arc.arc = true;
    c.arc.radius = r;
    c.arc.center = c.in_point + (turn > 0 ? r : -r) * perp(d_in);
    const Vec2 rel = c.in_point - c.arc.center;
    c.arc.start_angle = std::atan2(rel.y(), rel.x());
    c.arc.sweep = turn;
    c.arc.length = r * std::abs(turn);
  }
  std::vector<Piece> pieces;
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (corners[i].has_arc) pieces.push_back(corners[i].arc);
    Piece seg;
    seg.start = corners[i].out_point;
    seg.end = corners[(i + 1) % n].in_point;
    seg.length = (seg.end - seg.start).norm();
    if (seg.length > 0.0) pieces.push_back(seg);
  }
  for (const Piece& p : pieces) total += p.length;

  // Dense uniform arc-length samples.
  constexpr int dense = 8192;
  std::vector<cplx> samples(dense);
  {
    size_t k = 0;
    double offset = 0.0;
    for (int j = 0; j < dense; ++j) {
      const double s = total * j / dense;
      while (k + 1 < pieces.size() && s > offset + pieces[k].length) {
        offset += pieces[k].length;
        ++k;
      }
      const Vec2 x = pieces[k].at(std::clamp(s - offset, 0.0, pieces[k].length));
      samples[j] = {x.x(), x.y()};
    }
  }

  // Gaussian mollifier of width half the rounding radius (arc length).
  const double width = 0.5 * rounding;
  const int kmax = std::min(dense / 2 - 1,
                            static_cast<int>(std::ceil(8.85 * total / (two_pi * width))));
  auto fc = std::make_shared<FourierCurve>();
  fc->kmax = kmax;
  fc->coeffs.assign(2 * kmax + 1, 0.0);
  std::vector<cplx> twiddle(dense);
  for (int m = 0; m < dense; ++m) twiddle[m] = std::polar(1.0, -two_pi * m / dense);
  for (int k = -kmax; k <= kmax; ++k) {
    cplx sum = 0.0;
    const int kk = (k % dense + dense) % dense;
    for (int j = 0; j < dense; ++j) sum += samples[j] * twiddle[(static_cast<long>(j) * kk) % dense];
    const double damp = std::exp(-0.5 * std::pow(two_pi * k * width / total, 2));
    fc->coeffs[k + kmax] = sum / double(dense) * damp;
  }
  return [fc](double t) { return (*fc)(t); };
}

Parametrization shape_parametrization(const ShapeSpec& spec) {
  if (!(spec.a > 0.0)) throw ValidationError("shape size must be positive");
  if (spec.rounding < 0.0) throw ValidationError("corner rounding radius must be positive");
  const double a = spec.a, b = spec.b;
  switch (spec.kind) {
    case ShapeKind::disk:
      return [a](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return CurvePoint{{a * c, a * s}, {-a * s, a * c}, {-a * c, -a * s}};
      };
    case ShapeKind::ellipse:
      if (!(b > 0.0)) throw ValidationError("ellipse semi-axes must be positive");
      return [a, b](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return CurvePoint{{a * c, b * s}, {-a * s, b * c}, {-a * c, -b * s}};
      };
    default:
      break;
  }

  std::vector<Vec2> v;
  switch (spec.kind) {
    case ShapeKind::rectangle:
      if (!(b > 0.0)) throw ValidationError("rectangle sides must be positive");
      v = {{-a / 2, -b / 2}, {a / 2, -b / 2}, {a / 2, b / 2}, {-a / 2, b / 2}};
      break;
    case ShapeKind::square:
      v = {{-a / 2, -a / 2}, {a / 2, -a / 2}, {a / 2, a / 2}, {-a / 2, a / 2}};
      break;
    case ShapeKind::triangle: {
      const double h = a * std::sqrt(3.0) / 2.0;
      v = {{-a / 2, -h / 3}, {a / 2, -h / 3}, {0.0, 2 * h / 3}};
      break;
    }
    case ShapeKind::letter_a: v = scaled_to_diameter(letter_a_vertices(), a); break;
    case ShapeKind::letter_e: v = scaled_to_diameter(letter_e_vertices(), a); break;
    case ShapeKind::custom:
      v = read_polyline(spec.file);
      if (polygon_self_intersects(v)) throw ValidationError("polyline '" + spec.file + "' is self-intersecting");
      for (Vec2& p : v) p *= a;
      break;
    default: break;
  }
  const double rounding = spec.rounding > 0.0 ? spec.rounding : 0.05 * polygon_diameter(v);
  Parametrization curve = rounded_polygon(v, rounding);
  const Vec2 c = sample_curve(curve, 1024).centroid();
  return shifted(std::move(curve), -c);
}

}  // namespace esense
