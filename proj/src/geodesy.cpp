#include "geocms/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geocms {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

double geo_distance(const GeoPoint& p, const GeoPoint& q) {
  const double phi1 = p.lat * kDegToRad;
  const double phi2 = q.lat * kDegToRad;
  const double dphi = (q.lat - p.lat) * kDegToRad;
  const double dlambda = (q.lon - p.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double bearing(const GeoPoint& p, const GeoPoint& q) {
  if (p.lon == q.lon && p.lat == q.lat) {
    throw Error(ErrorCode::CoincidentPoints, "bearing between coincident points is undefined");
  }
  const double phi1 = p.lat * kDegToRad;
  const double phi2 = q.lat * kDegToRad;
  const double dlambda = (q.lon - p.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return normalize_degrees(std::atan2(y, x) * kRadToDeg);
}

GeoPoint destination(const GeoPoint& p, double bearing_deg, double meters) {
  if (meters == 0.0) return p;
  const double delta = meters / kEarthRadiusM;
  const double theta = bearing_deg * kDegToRad;
  const double phi1 = p.lat * kDegToRad;
  const double lambda1 = p.lon * kDegToRad;

  const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::min(1.0, std::max(-1.0, sin_phi2)));
  const double y = std::sin(theta) * std::sin(delta) * std::cos(phi1);
  const double x = std::cos(delta) - std::sin(phi1) * sin_phi2;
  const double lambda2 = lambda1 + std::atan2(y, x);

  double lon = lambda2 * kRadToDeg;
  if (lon < -180.0 || lon > 180.0) lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return GeoPoint{lon, phi2 * kRadToDeg, p.alt};
}

double normalize_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value can round back up to 360.
  if (r >= 360.0) r = 0.0;
  return r;
}

double angular_difference(double a_deg, double b_deg) {
  const double d = normalize_degrees(a_deg - b_deg);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace geocms
