#pragma once

// Reference evaluators used only by tests. They deliberately take different
// routes from the library (3D unit vectors instead of trig identities, plain
// scans instead of binary search, hand-rolled civil calendar instead of
// <chrono>) so that agreement means something.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geocms/media.hpp"
#include "geocms/temporal.hpp"

namespace oracle {

inline constexpr double kR = 6371008.8;
inline constexpr double kPi = std::numbers::pi;

struct V3 {
  double x, y, z;
};

inline V3 operator+(V3 a, V3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline V3 operator-(V3 a, V3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline V3 operator*(double s, V3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline V3 cross(V3 a, V3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double norm(V3 a) { return std::sqrt(dot(a, a)); }

inline V3 unit(double lon_deg, double lat_deg) {
  const double lon = lon_deg * kPi / 180.0;
  const double lat = lat_deg * kPi / 180.0;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

inline V3 east_at(V3 p) {
  V3 e{-p.y, p.x, 0.0};
  return (1.0 / norm(e)) * e;
}
inline V3 north_at(V3 p) { return cross(p, east_at(p)); }

/// Central angle via atan2(|u x v|, u . v), scaled by the radius.
inline double distance(const geocms::GeoPoint& p, const geocms::GeoPoint& q) {
  const V3 u = unit(p.lon, p.lat);
  const V3 v = unit(q.lon, q.lat);
  return kR * std::atan2(norm(cross(u, v)), dot(u, v));
}

/// Bearing from the tangent direction of the great circle p -> q.
inline double bearing(const geocms::GeoPoint& p, const geocms::GeoPoint& q) {
  const V3 u = unit(p.lon, p.lat);
  const V3 v = unit(q.lon, q.lat);
  const V3 t = v - dot(u, v) * u;
  double deg = std::atan2(dot(t, east_at(u)), dot(t, north_at(u))) * 180.0 / kPi;
  if (deg < 0) deg += 360.0;
  return deg;
}

/// Rotates the position vector toward the bearing's tangent direction.
inline geocms::GeoPoint destination(const geocms::GeoPoint& p, double bearing_deg, double meters) {
  const V3 u = unit(p.lon, p.lat);
  const double th = bearing_deg * kPi / 180.0;
  const V3 dir = std::cos(th) * north_at(u) + std::sin(th) * east_at(u);
  const double delta = meters / kR;
  const V3 r = std::cos(delta) * u + std::sin(delta) * dir;
  return {std::atan2(r.y, r.x) * 180.0 / kPi, std::asin(r.z) * 180.0 / kPi, p.alt};
}

inline double angdiff(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

/// Brute-force sector membership.
inline bool in_sector(const geocms::GeoPoint& cam, double dir, double h_angle, double dist,
                      const geocms::GeoPoint& p) {
  if (p.lon == cam.lon && p.lat == cam.lat) return true;
  if (oracle::distance(cam, p) > dist) return false;
  if (h_angle >= 360.0) return true;
  return angdiff(oracle::bearing(cam, p), dir) <= h_angle / 2.0;
}

/// Reference evaluator: linear scan for the bracketing samples.
/// Returns nullopt where the mode has no value.
inline std::optional<double> eval_series(const std::vector<std::int64_t>& ts, const std::vector<double>& vs,
                                         geocms::InterpolationMode mode, std::int64_t t) {
  if (t < ts.front() || t > ts.back()) return std::nullopt;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] == t) return vs[i];
  }
  std::size_t k = 0;
  while (!(ts[k] < t && t < ts[k + 1])) ++k;
  switch (mode) {
    case geocms::InterpolationMode::Discrete: return std::nullopt;
    case geocms::InterpolationMode::Stepwise: return vs[k];
    case geocms::InterpolationMode::Linear: {
      const double w = double(t - ts[k]) / double(ts[k + 1] - ts[k]);
      return vs[k] * (1.0 - w) + vs[k + 1] * w;
    }
  }
  return std::nullopt;
}

/// Camera state of a video at t, derived from the raw samples by scanning.
/// `heading` is empty when no segment of the track moves.
struct VideoState {
  geocms::GeoPoint camera;
  std::optional<double> direction;  // absolute, empty when unresolvable
  double h_angle;
  double distance;
};

inline VideoState video_state(const geocms::MovingVideo& v, std::int64_t t) {
  const auto& s = v.track().samples();
  std::vector<std::int64_t> ts;
  std::vector<double> lons, lats;
  for (const auto& x : s) {
    ts.push_back(x.t.millis);
    lons.push_back(x.position.lon);
    lats.push_back(x.position.lat);
  }
  const auto lin = geocms::InterpolationMode::Linear;
  VideoState out{{*eval_series(ts, lons, lin, t), *eval_series(ts, lats, lin, t)}, std::nullopt, 0, 0};

  std::size_t k = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] <= t) k = i;
  }
  const geocms::FieldOfView& f = v.fovs().size() == 1 ? v.fovs()[0] : v.fovs()[k];
  out.distance = f.view_distance;
  out.h_angle = f.direction2d ? f.h_angle : 360.0;
  if (!f.direction2d) {
    out.direction = 0.0;
  } else if (*f.direction2d >= 0) {
    out.direction = *f.direction2d;
  } else {
    std::optional<double> heading;
    if (ts.size() >= 2) {
      const std::size_t seg = std::min(k, ts.size() - 2);
      auto moving = [&](std::size_t j) { return s[j].position.lon != s[j + 1].position.lon || s[j].position.lat != s[j + 1].position.lat; };
      for (std::size_t j = seg + 1; j-- > 0 && !heading;) {
        if (moving(j)) heading = oracle::bearing(s[j].position, s[j + 1].position);
      }
      for (std::size_t j = seg + 1; j + 1 < ts.size() && !heading; ++j) {
        if (moving(j)) heading = oracle::bearing(s[j].position, s[j + 1].position);
      }
    }
    if (heading) out.direction = std::fmod(*heading + std::fmod(-*f.direction2d, 360.0), 360.0);
  }
  return out;
}

inline bool video_sees(const geocms::MovingVideo& v, std::int64_t t, const geocms::GeoPoint& p) {
  const VideoState st = video_state(v, t);
  return st.direction && in_sector(st.camera, *st.direction, st.h_angle, st.distance, p);
}

/// Visibility runs over an explicit list of sample times.
inline std::vector<geocms::TimeInterval> sweep(const geocms::MovingVideo& v, const geocms::GeoPoint& p,
                                               const std::vector<std::int64_t>& times) {
  std::vector<geocms::TimeInterval> out;
  bool open = false;
  for (std::int64_t t : times) {
    if (video_sees(v, t, p)) {
      if (open) {
        out.back().end = geocms::TimeStamp{t};
      } else {
        out.push_back({geocms::TimeStamp{t}, geocms::TimeStamp{t}});
        open = true;
      }
    } else {
      open = false;
    }
  }
  return out;
}

/// Track timestamps plus every `step` ms from the start.
inline std::vector<std::int64_t> sample_times(const geocms::MovingVideo& v, std::int64_t step) {
  std::vector<std::int64_t> times;
  const auto& s = v.track().samples();
  for (std::int64_t t = s.front().t.millis; t <= s.back().t.millis; t += step) times.push_back(t);
  for (const auto& x : s) times.push_back(x.t.millis);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

/// Civil calendar decomposition without <chrono>.
struct Civil {
  std::int64_t year;
  int month, day, hour, minute, second, milli;
};

inline Civil civil_from_millis(std::int64_t ms) {
  std::int64_t days = ms / 86400000;
  std::int64_t rem = ms % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  // Walk years and months from 1970.
  std::int64_t y = 1970;
  auto leap = [](std::int64_t yy) { return (yy % 4 == 0 && yy % 100 != 0) || yy % 400 == 0; };
  while (days < 0) {
    --y;
    days += leap(y) ? 366 : 365;
  }
  while (days >= (leap(y) ? 366 : 365)) {
    days -= leap(y) ? 366 : 365;
    ++y;
  }
  const int mdays[] = {31, leap(y) ? 29 : 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int m = 0;
  while (days >= mdays[m]) days -= mdays[m++];
  return {y,
          m + 1,
          static_cast<int>(days) + 1,
          static_cast<int>(rem / 3600000),
          static_cast<int>(rem / 60000 % 60),
          static_cast<int>(rem / 1000 % 60),
          static_cast<int>(rem % 1000)};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle

#ifndef GEOCMS_FIXTURE_DIR
#error "GEOCMS_FIXTURE_DIR must be defined"
#endif

inline std::string fixture(const std::string& name) { return oracle::read_file(std::string(GEOCMS_FIXTURE_DIR) + "/" + name); }
