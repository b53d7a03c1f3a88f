#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geocms/codec.hpp"
#include "geocms/media.hpp"
#include "geocms/rtree.hpp"

namespace geocms {

struct Collection {
  std::string id;
  std::string title;
  MediaKind media_type = MediaKind::MovingPoint;
  TimeStamp created;

  bool operator==(const Collection&) const = default;
};

struct FeatureRecord {
  std::string fid;
  GeoMediaDocument doc;
  std::optional<BBox> bbox;  // nullopt for a MovingDouble without positions
  TimeInterval extent;

  static FeatureRecord make(std::string fid, GeoMediaDocument doc);
  bool operator==(const FeatureRecord&) const = default;
};

enum class AnnotationKind { Text, Icon, Polygon };

std::string_view to_string(AnnotationKind kind);
/// Throws BadAnnotation.
AnnotationKind annotation_kind_from_string(std::string_view s);

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PixelPoint&) const = default;
};

struct Annotation {
  std::string aid;
  AnnotationKind kind = AnnotationKind::Text;
  std::string text;                  // text body or icon name
  std::vector<PixelPoint> polygon;   // image-space vertices
  std::optional<TimeInterval> time_range;

  bool operator==(const Annotation&) const = default;
};

/// {"id", "kind", "body", "timeRange"?}; body is a string or [[x,y],...],
/// timeRange is [startMillis, endMillis].
Json annotation_to_json(const Annotation& a);
/// Throws BadAnnotation with a pointer path.
Annotation annotation_from_json(const Json& j);

struct CollectionSummary {
  Collection meta;
  std::size_t feature_count = 0;
  std::optional<BBox> bbox;
  std::optional<TimeInterval> extent;
};

struct StQueryResult {
  std::vector<FeatureRecord> features;
  std::size_t number_matched = 0;
};

inline constexpr std::size_t kDefaultLimit = 100;

/// Called before each flush step with the step name; throwing aborts the
/// flush at that point. Used to simulate crashes.
using FlushFaultHook = std::function<void(std::string_view step)>;

/// In-memory collections with a spatio-temporal index, optionally bound to
/// a directory. When bound, every mutation is flushed before it returns; a
/// failed flush rolls the mutation back.
///
/// Readers share a lock, writers take it exclusively, so readers never see
/// a half-applied mutation.
class MediaStore {
 public:
  MediaStore() = default;
  MediaStore(const MediaStore&) = delete;
  MediaStore& operator=(const MediaStore&) = delete;

  /// Creates `dir` if needed and writes an empty store there unless a
  /// manifest already exists. Throws IoError.
  static void init(const std::filesystem::path& dir);

  /// Loads `dir` (finishing any interrupted flush first) and binds the
  /// store to it. Throws IoError, CorruptStore.
  void open(const std::filesystem::path& dir);
  /// Replaces the contents with those of `dir` without binding.
  void load(const std::filesystem::path& dir);
  /// Writes the full store to `dir` all-or-nothing. Throws IoError.
  void flush(const std::filesystem::path& dir, const FlushFaultHook& hook = {}) const;

  const std::optional<std::filesystem::path>& bound_dir() const { return dir_; }

  Collection create_collection(const std::string& id, const std::string& title, MediaKind media_type,
                               std::optional<TimeStamp> created = std::nullopt);
  void delete_collection(const std::string& id);
  std::vector<Collection> list_collections() const;
  Collection get_collection(const std::string& id) const;
  CollectionSummary summarize(const std::string& id) const;

  FeatureRecord put_feature(const std::string& cid, const std::string& fid, GeoMediaDocument doc);
  FeatureRecord get_feature(const std::string& cid, const std::string& fid) const;
  void delete_feature(const std::string& cid, const std::string& fid);
  /// Every feature in fid order.
  std::vector<FeatureRecord> all_features(const std::string& cid) const;

  /// Features whose bbox intersects `bbox` and whose extent overlaps
  /// `interval`, in fid order, then paged. Throws NotFound, BadQuery.
  StQueryResult st_query(const std::string& cid, const std::optional<BBox>& bbox,
                         const std::optional<TimeInterval>& interval, std::size_t limit = kDefaultLimit,
                         std::size_t offset = 0) const;
  /// Unpaged index candidates, same filter as st_query.
  std::vector<FeatureRecord> candidates(const std::string& cid, const std::optional<BBox>& bbox,
                                        const std::optional<TimeInterval>& interval) const;

  /// Empty aid gets a generated one. Existing aid is replaced.
  Annotation put_annotation(const std::string& cid, const std::string& fid, Annotation ann);
  std::vector<Annotation> list_annotations(const std::string& cid, const std::string& fid) const;
  Annotation get_annotation(const std::string& cid, const std::string& fid, const std::string& aid) const;
  void delete_annotation(const std::string& cid, const std::string& fid, const std::string& aid);

  /// Structural self-check for tests: index entries match records.
  bool check_consistency() const;

 private:
  struct IntervalEntry {
    TimeInterval iv;
    std::string fid;
  };

  struct CollectionState {
    Collection meta;
    std::map<std::string, FeatureRecord> features;
    std::map<std::string, std::map<std::string, Annotation>> annotations;
    std::uint64_t next_aid = 1;
    RTree<std::string> spatial;
    std::vector<IntervalEntry> temporal;  // sorted by (start, fid)

    void index(const FeatureRecord& rec);
    void unindex(const FeatureRecord& rec);
  };

  using Undo = std::function<void()>;

  CollectionState& state(const std::string& cid);
  const CollectionState& state(const std::string& cid) const;
  std::vector<FeatureRecord> candidates_locked(const CollectionState& cs, const std::optional<BBox>& bbox,
                                               const std::optional<TimeInterval>& interval) const;
  void commit(const Undo& undo);
  void flush_locked(const std::filesystem::path& dir, const FlushFaultHook& hook) const;
  static std::map<std::string, CollectionState> read_dir(const std::filesystem::path& dir);

  mutable std::shared_mutex mu_;
  std::map<std::string, CollectionState> collections_;
  std::optional<std::filesystem::path> dir_;
};

/// Checks [A-Za-z0-9_-]{1,64}.
bool valid_collection_id(std::string_view id);
/// Non-empty, at most 256 bytes, no '/', no control characters.
bool valid_feature_id(std::string_view id);

}  // namespace geocms
