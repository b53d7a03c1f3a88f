#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geocms/media.hpp"
#include "geocms/store.hpp"

namespace geocms {

struct NearPoint {
  GeoPoint center;
  double radius_m = 0.0;
};

struct QuerySpec {
  std::optional<BBox> bbox;
  std::optional<TimeInterval> interval;
  std::optional<NearPoint> near;
  std::optional<GeoPoint> visible_from;
  std::size_t limit = kDefaultLimit;
  std::size_t offset = 0;

  /// Throws BadQuery.
  void validate() const;
};

struct QueryResult {
  std::vector<FeatureRecord> features;
  std::size_t number_matched = 0;
};

inline constexpr std::int64_t kDefaultSampleStepMs = 100;

/// Track position at t for MovingPoint and MovingVideo features. Throws
/// WrongKind, OutOfRange, NotASample.
GeoPoint position_at(const GeoMediaDocument& doc, TimeStamp t);

struct FovState {
  GeoPoint camera;
  double abs_direction = 0.0;
  FieldOfView fov;
};

/// Camera position, resolved bearing and view entry in effect at t.
/// Throws OutOfRange, DegenerateTrack.
FovState fov_at(const MovingVideo& video, TimeStamp t);

/// Maximal runs of sample times at which `p` lies inside the view. Samples
/// are the track timestamps plus every `step_ms` from the start. Instants
/// where a mount-relative view has no defined heading count as not visible.
std::vector<TimeInterval> visible_intervals(const MovingVideo& video, const GeoPoint& p,
                                            std::int64_t step_ms = kDefaultSampleStepMs);

/// Mean distance in meters between the two tracks (evaluated linearly) over
/// the union of their sample times inside the common extent. Throws
/// NoTemporalOverlap.
double trajectory_similarity(const MovingPoint& a, const MovingPoint& b);

/// Exact predicate of `q` minus paging. Throws WrongKind for visibleFrom on
/// media without a view.
bool matches(const FeatureRecord& rec, const QuerySpec& q);

/// Index candidates refined by matches(), in fid order, then paged.
/// Throws NotFound, BadQuery, WrongKind.
QueryResult evaluate(const MediaStore& store, const std::string& cid, const QuerySpec& q);

}  // namespace geocms
