#pragma once

#include <optional>
#include <vector>

#include "geocms/temporal.hpp"

namespace geocms {

/// Camera view descriptor. `direction2d` in [0, 360) is an absolute bearing;
/// in [-360, 0) it is relative to the carrier's heading (-360 ahead, -90
/// right, -180 behind, -270 left). An absent direction means the camera
/// orientation is unknown and the view is treated as all-round.
struct FieldOfView {
  static constexpr double kDefaultHorizontalAngle = 63.0;
  static constexpr double kDefaultVerticalAngle = 60.0;
  static constexpr double kDefaultViewDistance = 100.0;

  double h_angle = kDefaultHorizontalAngle;
  double v_angle = kDefaultVerticalAngle;
  std::optional<double> direction2d;
  double view_distance = kDefaultViewDistance;

  bool is_relative() const { return direction2d && *direction2d < 0.0; }
  /// Throws BadFieldValue naming the first offending member.
  void validate() const;

  bool operator==(const FieldOfView&) const = default;
};

/// Closed ring, first == last.
struct SectorPolygon {
  std::vector<GeoPoint> ring;
};

inline constexpr double kDefaultArcStepDeg = 5.0;

/// Absolute bearing in [0, 360). Relative directions need `heading`
/// (MissingHeading otherwise). An absent direction resolves to 0.
double resolve_direction(const FieldOfView& fov, std::optional<double> heading);

/// The visible wedge as a polygon: apex, arc from direction - h/2 to
/// direction + h/2 at no more than `arc_step_deg` spacing, apex. A 360 degree
/// aperture yields a closed circle with no apex.
SectorPolygon fov_sector_polygon(const GeoPoint& camera, double abs_direction, const FieldOfView& fov,
                                 double arc_step_deg = kDefaultArcStepDeg);

/// Distance-and-bearing test against the circular sector.
bool fov_contains(const GeoPoint& camera, double abs_direction, const FieldOfView& fov, const GeoPoint& p);

/// Whether two discretized sectors intersect; touching counts.
bool fov_overlap(const GeoPoint& camera_a, double dir_a, const FieldOfView& fov_a, const GeoPoint& camera_b,
                 double dir_b, const FieldOfView& fov_b);

/// Bounds of the default-step sector polygon vertices.
BBox fov_bbox(const GeoPoint& camera, double abs_direction, const FieldOfView& fov);

/// A view with unknown orientation behaves as a full circle.
FieldOfView effective_view(const FieldOfView& fov);

}  // namespace geocms
