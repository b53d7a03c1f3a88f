#include "geocms/fov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "geocms/geodesy.hpp"

namespace geocms {

void FieldOfView::validate() const {
  auto fail = [](const char* member, const std::string& why) {
    throw Error(ErrorCode::BadFieldValue, std::string(member) + " " + why, std::string("/") + member);
  };
  if (!(h_angle > 0.0 && h_angle <= 360.0)) fail("horizontalAngle", "must be in (0, 360]");
  if (!(v_angle > 0.0 && v_angle <= 180.0)) fail("verticalAngle", "must be in (0, 180]");
  if (!(view_distance > 0.0) || !std::isfinite(view_distance)) fail("viewDistance", "must be positive");
  if (direction2d && !(*direction2d >= -360.0 && *direction2d < 360.0)) {
    fail("direction2d", "must be in [-360, 360)");
  }
}

FieldOfView effective_view(const FieldOfView& fov) {
  if (fov.direction2d) return fov;
  FieldOfView out = fov;
  out.h_angle = 360.0;
  return out;
}

double resolve_direction(const FieldOfView& fov, std::optional<double> heading) {
  if (!fov.direction2d) return 0.0;
  const double d = *fov.direction2d;
  if (d >= 0.0) return normalize_degrees(d);
  if (!heading) {
    throw Error(ErrorCode::MissingHeading, "mount-relative direction " + std::to_string(d) + " needs a heading");
  }
  return normalize_degrees(*heading + normalize_degrees(-d));
}

SectorPolygon fov_sector_polygon(const GeoPoint& camera, double abs_direction, const FieldOfView& fov,
                                 double arc_step_deg) {
  if (!(arc_step_deg > 0.0)) throw Error(ErrorCode::InvalidArgument, "arc step must be positive");
  SectorPolygon poly;
  const bool full = fov.h_angle >= 360.0;
  const auto segments = static_cast<int>(std::ceil(fov.h_angle / arc_step_deg));
  const double spacing = fov.h_angle / segments;
  const double first = abs_direction - fov.h_angle / 2.0;

  if (full) {
    poly.ring.reserve(segments + 1);
    for (int k = 0; k < segments; ++k) {
      poly.ring.push_back(destination(camera, normalize_degrees(first + k * spacing), fov.view_distance));
    }
    poly.ring.push_back(poly.ring.front());
    return poly;
  }

  poly.ring.reserve(segments + 3);
  poly.ring.push_back(camera);
  for (int k = 0; k <= segments; ++k) {
    poly.ring.push_back(destination(camera, normalize_degrees(first + k * spacing), fov.view_distance));
  }
  poly.ring.push_back(camera);
  return poly;
}

bool fov_contains(const GeoPoint& camera, double abs_direction, const FieldOfView& fov, const GeoPoint& p) {
  if (p.lon == camera.lon && p.lat == camera.lat) return true;
  if (geo_distance(camera, p) > fov.view_distance) return false;
  if (fov.h_angle >= 360.0) return true;
  return angular_difference(bearing(camera, p), abs_direction) <= fov.h_angle / 2.0;
}

namespace {

struct Vec2 {
  double x;
  double y;
};

// Equirectangular projection around an origin; metric error is negligible
// at the few-hundred-meter scale of camera views.
std::vector<Vec2> project(const std::vector<GeoPoint>& ring, const GeoPoint& origin) {
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  const double kx = kEarthRadiusM * std::cos(origin.lat * kDegToRad) * kDegToRad;
  const double ky = kEarthRadiusM * kDegToRad;
  std::vector<Vec2> out;
  out.reserve(ring.size());
  for (const auto& p : ring) {
    double dlon = p.lon - origin.lon;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon < -180.0) dlon += 360.0;
    out.push_back({dlon * kx, (p.lat - origin.lat) * ky});
  }
  return out;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

// Even-odd rule over a closed ring.
bool inside(const Vec2& p, const std::vector<Vec2>& ring) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

bool polygons_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
    }
  }
  return inside(a.front(), b) || inside(b.front(), a);
}

}  // namespace

bool fov_overlap(const GeoPoint& camera_a, double dir_a, const FieldOfView& fov_a, const GeoPoint& camera_b,
                 double dir_b, const FieldOfView& fov_b) {
  if (geo_distance(camera_a, camera_b) > fov_a.view_distance + fov_b.view_distance) return false;
  // Projecting around the midpoint keeps the test symmetric in its arguments.
  const GeoPoint origin{(camera_a.lon + camera_b.lon) / 2.0, (camera_a.lat + camera_b.lat) / 2.0, std::nullopt};
  const auto pa = project(fov_sector_polygon(camera_a, dir_a, fov_a).ring, origin);
  const auto pb = project(fov_sector_polygon(camera_b, dir_b, fov_b).ring, origin);
  return polygons_intersect(pa, pb);
}

BBox fov_bbox(const GeoPoint& camera, double abs_direction, const FieldOfView& fov) {
  BBox box = BBox::of_point(camera);
  for (const auto& p : fov_sector_polygon(camera, abs_direction, fov).ring) box.expand(p);
  return box;
}

}  // namespace geocms
