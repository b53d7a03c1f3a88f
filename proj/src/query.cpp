#include "geocms/query.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geocms/geodesy.hpp"

namespace geocms {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double hav(double rad) {
  const double s = std::sin(rad / 2.0);
  return s * s;
}

// Lower bound on the distance from `p` to any point of `box`, from the
// haversine identity with each term bounded below over the box.
double min_distance_to_box(const GeoPoint& p, const BBox& box) {
  const double dlat = std::max({0.0, box.min_lat - p.lat, p.lat - box.max_lat});
  double dlon = 0.0;
  if (p.lon < box.min_lon || p.lon > box.max_lon) {
    auto gap = [](double a, double b) {
      const double d = std::fmod(std::fabs(a - b), 360.0);
      return d > 180.0 ? 360.0 - d : d;
    };
    dlon = std::min(gap(p.lon, box.min_lon), gap(p.lon, box.max_lon));
  }
  const double cos_box = std::cos(std::max(std::fabs(box.min_lat), std::fabs(box.max_lat)) * kDegToRad);
  const double h = hav(dlat * kDegToRad) + std::max(0.0, cos_box) * std::cos(p.lat * kDegToRad) * hav(dlon * kDegToRad);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, h)));
}

// Box holding every point within `radius` of `c`, or nullopt when the
// circle reaches a pole or the antimeridian.
std::optional<BBox> circle_bbox(const GeoPoint& c, double radius) {
  const double delta = radius / kEarthRadiusM;
  const double dlat = delta / kDegToRad * (1 + 1e-9) + 1e-9;
  if (delta >= std::numbers::pi / 2 || std::fabs(c.lat) + dlat >= 90.0) return std::nullopt;
  const double s = std::sin(delta) / std::cos((std::fabs(c.lat) + dlat) * kDegToRad);
  if (s >= 1.0) return std::nullopt;
  const double dlon = std::asin(s) / kDegToRad * (1 + 1e-9) + 1e-9;
  if (c.lon - dlon < -180.0 || c.lon + dlon > 180.0) return std::nullopt;
  return BBox{c.lon - dlon, c.lat - dlat, c.lon + dlon, c.lat + dlat};
}

double max_view_distance(const MovingVideo& v) {
  double m = 0.0;
  for (const auto& f : v.fovs()) m = std::max(m, f.view_distance);
  return m;
}

bool near_any(const std::vector<PointSample>& samples, const NearPoint& n) {
  return std::any_of(samples.begin(), samples.end(),
                     [&](const PointSample& s) { return geo_distance(s.position, n.center) <= n.radius_m; });
}

bool has_view(MediaKind k) { return k == MediaKind::STPhoto || k == MediaKind::MovingVideo; }

}  // namespace

void QuerySpec::validate() const {
  if (limit < 1) throw Error(ErrorCode::BadQuery, "limit must be at least 1");
  if (bbox) {
    const GeoPoint lo{bbox->min_lon, bbox->min_lat, std::nullopt}, hi{bbox->max_lon, bbox->max_lat, std::nullopt};
    if (!lo.valid() || !hi.valid()) throw Error(ErrorCode::BadQuery, "bbox outside lon/lat range");
    if (!bbox->valid()) throw Error(ErrorCode::BadQuery, "inverted bbox");
  }
  if (interval && interval->end < interval->start) throw Error(ErrorCode::BadQuery, "interval end precedes start");
  if (near) {
    if (!near->center.valid()) throw Error(ErrorCode::BadQuery, "near point outside lon/lat range");
    if (!(near->radius_m > 0.0) || !std::isfinite(near->radius_m)) {
      throw Error(ErrorCode::BadQuery, "near radius must be positive");
    }
  }
  if (visible_from && !visible_from->valid()) throw Error(ErrorCode::BadQuery, "visibleFrom outside lon/lat range");
}

GeoPoint position_at(const GeoMediaDocument& doc, TimeStamp t) {
  if (const auto* mp = std::get_if<MovingPoint>(&doc.payload)) return mp->at(t);
  if (const auto* mv = std::get_if<MovingVideo>(&doc.payload)) return mv->track().at(t);
  throw Error(ErrorCode::WrongKind, std::string("no track on a ") + std::string(to_string(doc.kind())) + " feature");
}

FovState fov_at(const MovingVideo& video, TimeStamp t) {
  const FieldOfView& fov = video.fov_at(t);
  FovState out{video.track().at(t), 0.0, fov};
  if (fov.is_relative()) {
    out.abs_direction = resolve_direction(fov, video.track().heading_at(t));
  } else {
    out.abs_direction = resolve_direction(fov, std::nullopt);
  }
  return out;
}

std::vector<TimeInterval> visible_intervals(const MovingVideo& video, const GeoPoint& p, std::int64_t step_ms) {
  if (step_ms < 1) throw Error(ErrorCode::InvalidArgument, "sample step must be at least 1 ms");
  const MovingPoint& track = video.track();
  std::vector<TimeInterval> out;
  if (min_distance_to_box(p, track.bbox()) > max_view_distance(video) * (1 + 1e-9)) return out;

  std::vector<TimeStamp> times;
  const TimeInterval ext = track.extent();
  for (std::int64_t t = ext.start.millis; t <= ext.end.millis; t += step_ms) times.push_back(TimeStamp{t});
  for (const auto& s : track.samples()) times.push_back(s.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::optional<TimeInterval> run;
  for (TimeStamp t : times) {
    bool visible = false;
    try {
      const FovState st = fov_at(video, t);
      visible = fov_contains(st.camera, st.abs_direction, effective_view(st.fov), p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateTrack) throw;
    }
    if (visible) {
      if (run) {
        run->end = t;
      } else {
        run = TimeInterval{t, t};
      }
    } else if (run) {
      out.push_back(*run);
      run.reset();
    }
  }
  if (run) out.push_back(*run);
  return out;
}

double trajectory_similarity(const MovingPoint& a, const MovingPoint& b) {
  const TimeInterval ea = a.extent(), eb = b.extent();
  if (!ea.overlaps(eb)) throw Error(ErrorCode::NoTemporalOverlap, "tracks do not overlap in time");
  const TimeInterval common{std::max(ea.start, eb.start), std::min(ea.end, eb.end)};
  std::vector<TimeStamp> times;
  for (const auto* mp : {&a, &b}) {
    for (const auto& s : mp->samples()) {
      if (common.contains(s.t)) times.push_back(s.t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  double sum = 0.0;
  for (TimeStamp t : times) sum += geo_distance(a.at_linear(t), b.at_linear(t));
  return sum / static_cast<double>(times.size());
}

bool matches(const FeatureRecord& rec, const QuerySpec& q) {
  if (q.visible_from && !has_view(rec.doc.kind())) {
    throw Error(ErrorCode::WrongKind, "visibleFrom needs photo or video media");
  }
  if (q.bbox && !(rec.bbox && rec.bbox->intersects(*q.bbox))) return false;
  if (q.interval && !rec.extent.overlaps(*q.interval)) return false;
  if (q.near) {
    bool hit = false;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, MovingPoint>) {
            hit = near_any(v.samples(), *q.near);
          } else if constexpr (std::is_same_v<T, MovingVideo>) {
            hit = near_any(v.track().samples(), *q.near);
          } else if constexpr (std::is_same_v<T, STPhoto>) {
            hit = geo_distance(v.location, q.near->center) <= q.near->radius_m;
          } else if (v.track()) {
            hit = std::any_of(v.track()->begin(), v.track()->end(),
                              [&](const GeoPoint& p) { return geo_distance(p, q.near->center) <= q.near->radius_m; });
          }
        },
        rec.doc.payload);
    if (!hit) return false;
  }
  if (q.visible_from) {
    if (const auto* photo = std::get_if<STPhoto>(&rec.doc.payload)) {
      if (!fov_contains(photo->location, photo->abs_direction(), effective_view(photo->fov), *q.visible_from)) return false;
    } else if (visible_intervals(std::get<MovingVideo>(rec.doc.payload), *q.visible_from).empty()) {
      return false;
    }
  }
  return true;
}

QueryResult evaluate(const MediaStore& store, const std::string& cid, const QuerySpec& q) {
  q.validate();
  if (q.visible_from && !has_view(store.get_collection(cid).media_type)) {
    throw Error(ErrorCode::WrongKind, "visibleFrom needs photo or video media");
  }
  std::optional<BBox> prefilter = q.bbox;
  if (!prefilter && q.near) prefilter = circle_bbox(q.near->center, q.near->radius_m);

  QueryResult res;
  for (auto& rec : store.candidates(cid, prefilter, q.interval)) {
    if (!matches(rec, q)) continue;
    if (res.number_matched++ >= q.offset && res.features.size() < q.limit) res.features.push_back(std::move(rec));
  }
  return res;
}

}  // namespace geocms
