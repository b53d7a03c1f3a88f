#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "geocms/fov.hpp"
#include "geocms/temporal.hpp"

namespace geocms {

enum class MediaKind { MovingPoint, MovingDouble, STPhoto, MovingVideo };

/// Type tag as written in documents ("MovingPoint", "MovingDouble", "stphoto", "MovingVideo").
std::string_view to_string(MediaKind kind);
/// Case-insensitive; throws UnknownType.
MediaKind media_kind_from_string(std::string_view tag);

/// A geo-tagged photo: image URI, camera location, capture time, view.
struct STPhoto {
  std::string uri;
  GeoPoint location;
  TimeStamp t;
  FieldOfView fov;

  /// Throws BadFieldValue / InvalidArgument.
  void validate() const;
  /// Camera bearing; all-round views resolve to 0.
  double abs_direction() const;

  bool operator==(const STPhoto&) const = default;
};

/// A geo-tagged video: camera track plus either one constant view or one
/// view per track sample (selected stepwise in time).
class MovingVideo {
 public:
  MovingVideo(std::string uri, MovingPoint track, std::vector<FieldOfView> fovs);

  const std::string& uri() const { return uri_; }
  const MovingPoint& track() const { return track_; }
  const std::vector<FieldOfView>& fovs() const { return fovs_; }
  bool constant_fov() const { return fovs_.size() == 1; }

  /// View in effect at t (latest sample with time <= t). Throws OutOfRange.
  const FieldOfView& fov_at(TimeStamp t) const;

  bool operator==(const MovingVideo&) const = default;

 private:
  std::string uri_;
  MovingPoint track_;
  std::vector<FieldOfView> fovs_;
};

using MediaPayload = std::variant<MovingPoint, MovingDouble, STPhoto, MovingVideo>;

/// A parsed document. `extras` carries members the codec does not interpret,
/// in their original order, so they survive a round trip.
struct GeoMediaDocument {
  MediaPayload payload;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();

  MediaKind kind() const { return static_cast<MediaKind>(payload.index()); }

  bool operator==(const GeoMediaDocument&) const = default;
};

TimeInterval time_extent(const MovingPoint& mp);
TimeInterval time_extent(const MovingDouble& md);
TimeInterval time_extent(const MovingVideo& mv);
TimeInterval time_extent(const STPhoto& photo);
TimeInterval time_extent(const GeoMediaDocument& doc);

BBox spatial_bbox(const MovingPoint& mp);
BBox spatial_bbox(const MovingVideo& mv);
/// Covers the view sector, not just the camera point.
BBox spatial_bbox(const STPhoto& photo);
/// nullopt for a MovingDouble without positions.
std::optional<BBox> spatial_bbox(const GeoMediaDocument& doc);

}  // namespace geocms
