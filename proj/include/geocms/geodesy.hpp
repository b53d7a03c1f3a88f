#pragma once

#include "geocms/temporal.hpp"

namespace geocms {

/// Mean earth radius used by every spherical computation in the library.
inline constexpr double kEarthRadiusM = 6371008.8;

/// Great-circle (haversine) distance in meters.
double geo_distance(const GeoPoint& p, const GeoPoint& q);

/// Initial great-circle bearing from p to q in [0, 360). Throws
/// CoincidentPoints when p and q share lon/lat.
double bearing(const GeoPoint& p, const GeoPoint& q);

/// Point reached by travelling `meters` from p along `bearing_deg`. Altitude
/// is carried over from p.
GeoPoint destination(const GeoPoint& p, double bearing_deg, double meters);

/// Wraps any angle into [0, 360).
double normalize_degrees(double deg);

/// Smallest absolute difference between two bearings, in [0, 180].
double angular_difference(double a_deg, double b_deg);

}  // namespace geocms
