#include "geocms/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geocms/geodesy.hpp"

namespace geocms {

TimeInterval TimeInterval::make(TimeStamp start, TimeStamp end) {
  if (end < start) {
    throw Error(ErrorCode::InvalidArgument, "interval start " + std::to_string(start.millis) +
                                                " is after end " + std::to_string(end.millis));
  }
  return {start, end};
}

bool GeoPoint::valid() const {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 && lon <= 180.0 && lat >= -90.0 &&
         lat <= 90.0 && (!alt || std::isfinite(*alt));
}

void BBox::expand(const GeoPoint& p) {
  min_lon = std::min(min_lon, p.lon);
  min_lat = std::min(min_lat, p.lat);
  max_lon = std::max(max_lon, p.lon);
  max_lat = std::max(max_lat, p.lat);
}

void BBox::expand(const BBox& b) {
  min_lon = std::min(min_lon, b.min_lon);
  min_lat = std::min(min_lat, b.min_lat);
  max_lon = std::max(max_lon, b.max_lon);
  max_lat = std::max(max_lat, b.max_lat);
}

namespace {

// Locates t on a strictly increasing timeline. Returns the index i with
// times[i] <= t, and whether times[i] == t.
template <typename Sample>
std::pair<std::size_t, bool> locate(const std::vector<Sample>& samples, TimeStamp t) {
  if (t < samples.front().t || samples.back().t < t) {
    throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t.millis) + " outside [" +
                                           std::to_string(samples.front().t.millis) + ", " +
                                           std::to_string(samples.back().t.millis) + "]");
  }
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](TimeStamp lhs, const Sample& s) { return lhs < s.t; });
  const auto i = static_cast<std::size_t>(std::distance(samples.begin(), it)) - 1;
  return {i, samples[i].t == t};
}

double fraction(TimeStamp t0, TimeStamp t1, TimeStamp t) {
  return static_cast<double>(t.millis - t0.millis) / static_cast<double>(t1.millis - t0.millis);
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double f) {
  GeoPoint out{lerp(a.lon, b.lon, f), lerp(a.lat, b.lat, f), std::nullopt};
  if (a.alt && b.alt) out.alt = lerp(*a.alt, *b.alt, f);
  return out;
}

template <typename Sample>
void check_times(const std::vector<Sample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "at least one sample is required");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i - 1].t < samples[i].t)) {
      throw Error(ErrorCode::NonIncreasingTime,
                  "timestamps must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

}  // namespace

MovingPoint::MovingPoint(std::vector<PointSample> samples, InterpolationMode mode)
    : samples_(std::move(samples)), mode_(mode) {
  check_times(samples_);
  const bool alt = samples_.front().position.alt.has_value();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& p = samples_[i].position;
    if (!p.valid()) {
      throw Error(ErrorCode::InvalidArgument, "invalid coordinate at index " + std::to_string(i));
    }
    if (p.alt.has_value() != alt) {
      throw Error(ErrorCode::InvalidArgument, "altitude must be present on all samples or none");
    }
  }
}

BBox MovingPoint::bbox() const {
  BBox b = BBox::of_point(samples_.front().position);
  for (const auto& s : samples_) b.expand(s.position);
  return b;
}

GeoPoint MovingPoint::at(TimeStamp t) const {
  const auto [i, exact] = locate(samples_, t);
  if (exact) return samples_[i].position;
  switch (mode_) {
    case InterpolationMode::Discrete:
      throw Error(ErrorCode::NotASample, "discrete track has no sample at " + std::to_string(t.millis));
    case InterpolationMode::Stepwise:
      return samples_[i].position;
    case InterpolationMode::Linear:
      break;
  }
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  return lerp(a.position, b.position, fraction(a.t, b.t, t));
}

GeoPoint MovingPoint::at_linear(TimeStamp t) const {
  const auto [i, exact] = locate(samples_, t);
  if (exact) return samples_[i].position;
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  return lerp(a.position, b.position, fraction(a.t, b.t, t));
}

MovingPoint MovingPoint::slice(const TimeInterval& iv) const {
  const TimeInterval ext = extent();
  if (!ext.overlaps(iv)) {
    throw Error(ErrorCode::NoOverlap, "slice interval does not overlap the track extent");
  }
  const TimeStamp lo = std::max(iv.start, ext.start);
  const TimeStamp hi = std::min(iv.end, ext.end);

  std::vector<PointSample> out;
  const bool fill = mode_ != InterpolationMode::Discrete;
  for (const auto& s : samples_) {
    if (s.t < lo || hi < s.t) continue;
    if (out.empty() && fill && lo < s.t) out.push_back({lo, at(lo)});
    out.push_back(s);
  }
  if (out.empty()) {
    if (!fill) throw Error(ErrorCode::NoOverlap, "no discrete samples inside the slice interval");
    out.push_back({lo, at(lo)});
    if (lo < hi) out.push_back({hi, at(hi)});
  } else if (fill && out.back().t < hi) {
    out.push_back({hi, at(hi)});
  }
  return MovingPoint(std::move(out), mode_);
}

double MovingPoint::heading_at(TimeStamp t) const {
  if (samples_.size() < 2) {
    throw Error(ErrorCode::DegenerateTrack, "heading needs at least two samples");
  }
  const std::size_t i = locate(samples_, t).first;
  // Segment k runs from sample k to k+1.
  const std::size_t seg = std::min(i, samples_.size() - 2);
  auto moves = [&](std::size_t k) {
    const auto& a = samples_[k].position;
    const auto& b = samples_[k + 1].position;
    return a.lon != b.lon || a.lat != b.lat;
  };
  for (std::size_t k = seg + 1; k-- > 0;) {
    if (moves(k)) return bearing(samples_[k].position, samples_[k + 1].position);
  }
  for (std::size_t k = seg + 1; k + 1 < samples_.size(); ++k) {
    if (moves(k)) return bearing(samples_[k].position, samples_[k + 1].position);
  }
  throw Error(ErrorCode::DegenerateTrack, "track never moves; heading is undefined");
}

MovingDouble::MovingDouble(std::vector<ValueSample> samples, InterpolationMode mode,
                           std::optional<std::vector<GeoPoint>> track)
    : samples_(std::move(samples)), mode_(mode), track_(std::move(track)) {
  check_times(samples_);
  for (const auto& s : samples_) {
    if (!std::isfinite(s.value)) throw Error(ErrorCode::InvalidArgument, "sample values must be finite");
  }
  if (track_) {
    if (track_->size() != samples_.size()) {
      throw Error(ErrorCode::LengthMismatch, "track length must equal the sample count");
    }
    for (const auto& p : *track_) {
      if (!p.valid()) throw Error(ErrorCode::InvalidArgument, "invalid track coordinate");
    }
  }
}

std::optional<BBox> MovingDouble::bbox() const {
  if (!track_) return std::nullopt;
  BBox b = BBox::of_point(track_->front());
  for (const auto& p : *track_) b.expand(p);
  return b;
}

double MovingDouble::at(TimeStamp t) const {
  const auto [i, exact] = locate(samples_, t);
  if (exact) return samples_[i].value;
  switch (mode_) {
    case InterpolationMode::Discrete:
      throw Error(ErrorCode::NotASample, "discrete series has no sample at " + std::to_string(t.millis));
    case InterpolationMode::Stepwise:
      return samples_[i].value;
    case InterpolationMode::Linear:
      break;
  }
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  return lerp(a.value, b.value, fraction(a.t, b.t, t));
}

}  // namespace geocms
