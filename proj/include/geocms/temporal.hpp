#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "geocms/error.hpp"

namespace geocms {

/// Milliseconds since the Unix epoch, UTC.
struct TimeStamp {
  std::int64_t millis = 0;

  constexpr auto operator<=>(const TimeStamp&) const = default;
};

/// Closed interval [start, end]; an instant has start == end.
struct TimeInterval {
  TimeStamp start;
  TimeStamp end;

  /// Throws InvalidArgument when start > end.
  static TimeInterval make(TimeStamp start, TimeStamp end);
  static TimeInterval instant(TimeStamp t) { return {t, t}; }

  bool contains(TimeStamp t) const { return start <= t && t <= end; }
  bool contains(const TimeInterval& o) const { return start <= o.start && o.end <= end; }
  bool overlaps(const TimeInterval& o) const { return start <= o.end && o.start <= end; }

  bool operator==(const TimeInterval&) const = default;
};

/// Longitude/latitude in degrees (WGS84 axis order lon, lat), optional altitude in meters.
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
  std::optional<double> alt;

  bool valid() const;
  bool operator==(const GeoPoint&) const = default;
};

/// Axis-aligned lon/lat box, inclusive on all edges.
struct BBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  static BBox of_point(const GeoPoint& p) { return {p.lon, p.lat, p.lon, p.lat}; }

  void expand(const GeoPoint& p);
  void expand(const BBox& b);
  bool valid() const { return min_lon <= max_lon && min_lat <= max_lat; }
  bool intersects(const BBox& b) const {
    return min_lon <= b.max_lon && b.min_lon <= max_lon && min_lat <= b.max_lat && b.min_lat <= max_lat;
  }
  bool contains(const GeoPoint& p) const {
    return min_lon <= p.lon && p.lon <= max_lon && min_lat <= p.lat && p.lat <= max_lat;
  }
  double area() const { return (max_lon - min_lon) * (max_lat - min_lat); }

  bool operator==(const BBox&) const = default;
};

enum class InterpolationMode { Discrete, Linear, Stepwise };

struct PointSample {
  TimeStamp t;
  GeoPoint position;

  bool operator==(const PointSample&) const = default;
};

struct ValueSample {
  TimeStamp t;
  double value = 0.0;

  bool operator==(const ValueSample&) const = default;
};

/// A trajectory: strictly time-ordered positions plus an interpolation rule.
/// Immutable after construction.
class MovingPoint {
 public:
  /// Throws InvalidArgument (empty, mixed altitude, invalid coordinates) or
  /// NonIncreasingTime.
  MovingPoint(std::vector<PointSample> samples, InterpolationMode mode);

  const std::vector<PointSample>& samples() const { return samples_; }
  InterpolationMode mode() const { return mode_; }
  std::size_t size() const { return samples_.size(); }
  bool has_altitude() const { return samples_.front().position.alt.has_value(); }

  TimeInterval extent() const { return {samples_.front().t, samples_.back().t}; }
  BBox bbox() const;

  /// Position at t. Throws OutOfRange outside the extent, NotASample for a
  /// Discrete track queried between samples.
  GeoPoint at(TimeStamp t) const;
  /// Same as at() but ignores the track's mode and interpolates linearly.
  GeoPoint at_linear(TimeStamp t) const;

  /// Sub-track over `iv`. Linear and Stepwise tracks gain boundary samples so
  /// that at() agrees with the original everywhere inside the overlap.
  MovingPoint slice(const TimeInterval& iv) const;

  /// Bearing of the segment containing t, degrees clockwise from north. At an
  /// interior vertex the outgoing segment wins; at the last vertex the
  /// incoming one. Zero-length segments borrow the nearest preceding bearing.
  double heading_at(TimeStamp t) const;

  bool operator==(const MovingPoint&) const = default;

 private:
  std::vector<PointSample> samples_;
  InterpolationMode mode_;
};

/// Scalar time series, optionally tied to a position per sample.
class MovingDouble {
 public:
  MovingDouble(std::vector<ValueSample> samples, InterpolationMode mode,
               std::optional<std::vector<GeoPoint>> track = std::nullopt);

  const std::vector<ValueSample>& samples() const { return samples_; }
  InterpolationMode mode() const { return mode_; }
  const std::optional<std::vector<GeoPoint>>& track() const { return track_; }
  std::size_t size() const { return samples_.size(); }

  TimeInterval extent() const { return {samples_.front().t, samples_.back().t}; }
  /// Bounds of the attached track; nullopt when the series has no positions.
  std::optional<BBox> bbox() const;

  double at(TimeStamp t) const;

  bool operator==(const MovingDouble&) const = default;

 private:
  std::vector<ValueSample> samples_;
  InterpolationMode mode_;
  std::optional<std::vector<GeoPoint>> track_;
};

}  // namespace geocms
