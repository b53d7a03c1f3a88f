#include "geocms/media.hpp"

#include <algorithm>
#include <cctype>

namespace geocms {

std::string_view to_string(MediaKind kind) {
  switch (kind) {
    case MediaKind::MovingPoint: return "MovingPoint";
    case MediaKind::MovingDouble: return "MovingDouble";
    case MediaKind::STPhoto: return "stphoto";
    case MediaKind::MovingVideo: return "MovingVideo";
  }
  return "";
}

MediaKind media_kind_from_string(std::string_view tag) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string key = lower(tag);
  for (auto kind : {MediaKind::MovingPoint, MediaKind::MovingDouble, MediaKind::STPhoto, MediaKind::MovingVideo}) {
    if (lower(to_string(kind)) == key) return kind;
  }
  throw Error(ErrorCode::UnknownType, "unknown media type '" + std::string(tag) + "'", "/type");
}

void STPhoto::validate() const {
  if (uri.empty()) throw Error(ErrorCode::InvalidArgument, "photo uri must not be empty", "/uri");
  if (!location.valid()) throw Error(ErrorCode::BadFieldValue, "invalid photo location", "/coordinates");
  try {
    fov.validate();
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), "/fov" + e.path());
  }
  if (fov.is_relative()) {
    throw Error(ErrorCode::BadFieldValue, "a photo has no carrier heading; direction2d must be absolute",
                "/fov/direction2d");
  }
}

double STPhoto::abs_direction() const { return resolve_direction(fov, std::nullopt); }

MovingVideo::MovingVideo(std::string uri, MovingPoint track, std::vector<FieldOfView> fovs)
    : uri_(std::move(uri)), track_(std::move(track)), fovs_(std::move(fovs)) {
  if (uri_.empty()) throw Error(ErrorCode::InvalidArgument, "video uri must not be empty", "/uri");
  if (fovs_.size() != 1 && fovs_.size() != track_.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "fov list must hold 1 entry or one per sample (" + std::to_string(track_.size()) + ")", "/fov");
  }
  for (std::size_t i = 0; i < fovs_.size(); ++i) {
    try {
      fovs_[i].validate();
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), "/fov/" + std::to_string(i) + e.path());
    }
  }
}

const FieldOfView& MovingVideo::fov_at(TimeStamp t) const {
  const auto& samples = track_.samples();
  if (!track_.extent().contains(t)) {
    throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t.millis) + " outside the video extent");
  }
  if (constant_fov()) return fovs_.front();
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](TimeStamp lhs, const PointSample& s) { return lhs < s.t; });
  return fovs_[static_cast<std::size_t>(std::distance(samples.begin(), it)) - 1];
}

TimeInterval time_extent(const MovingPoint& mp) { return mp.extent(); }
TimeInterval time_extent(const MovingDouble& md) { return md.extent(); }
TimeInterval time_extent(const MovingVideo& mv) { return mv.track().extent(); }
TimeInterval time_extent(const STPhoto& photo) { return TimeInterval::instant(photo.t); }

TimeInterval time_extent(const GeoMediaDocument& doc) {
  return std::visit([](const auto& v) { return time_extent(v); }, doc.payload);
}

BBox spatial_bbox(const MovingPoint& mp) { return mp.bbox(); }
BBox spatial_bbox(const MovingVideo& mv) { return mv.track().bbox(); }

BBox spatial_bbox(const STPhoto& photo) {
  return fov_bbox(photo.location, photo.abs_direction(), effective_view(photo.fov));
}

std::optional<BBox> spatial_bbox(const GeoMediaDocument& doc) {
  return std::visit(
      [](const auto& v) -> std::optional<BBox> {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, MovingDouble>) {
          return v.bbox();
        } else {
          return spatial_bbox(v);
        }
      },
      doc.payload);
}

}  // namespace geocms
