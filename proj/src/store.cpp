#include "geocms/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

namespace geocms {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kPending = "manifest.pending";
constexpr const char* kTmpSuffix = ".tmp";
constexpr const char* kFormat = "geocms-store";
constexpr int kFormatVersion = 1;

[[noreturn]] void io_fail(const std::string& what, const fs::path& p) {
  throw Error(ErrorCode::IoError, what + " '" + p.string() + "': " + std::strerror(errno));
}

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptStore, what); }

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_synced(const fs::path& p, std::string_view data) {
  const int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot create", p);
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_fail("cannot write", p);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_fail("cannot sync", p);
  }
  if (::close(fd) != 0) io_fail("cannot close", p);
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) io_fail("cannot open directory", dir);
  ::fsync(fd);
  ::close(fd);
}

void rename_file(const fs::path& from, const fs::path& to) {
  if (std::rename(from.c_str(), to.c_str()) != 0) io_fail("cannot rename", from);
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) io_fail("cannot read", p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Json file_entry(const std::string& name, const std::string& body, std::size_t lines) {
  Json j = Json::object();
  j["name"] = name;
  j["bytes"] = body.size();
  j["lines"] = lines;
  j["fnv1a64"] = hex64(fnv1a64(body));
  return j;
}

// Every data file named by a manifest.
std::vector<std::string> manifest_files(const Json& manifest) {
  std::vector<std::string> out;
  for (const auto& c : manifest.at("collections")) {
    out.push_back(c.at("features").at("name").get<std::string>());
    out.push_back(c.at("annotations").at("name").get<std::string>());
  }
  return out;
}

Json read_manifest(const fs::path& p) {
  try {
    Json j = Json::parse(read_all(p));
    if (j.value("format", "") != kFormat) corrupt("'" + p.string() + "' is not a store manifest");
    if (j.value("version", 0) != kFormatVersion) corrupt("unsupported store version in '" + p.string() + "'");
    manifest_files(j);
    return j;
  } catch (const Json::exception& e) {
    corrupt("malformed manifest '" + p.string() + "': " + e.what());
  }
}

// Completes a flush that reached its commit point, then drops leftovers of
// flushes that did not.
void recover(const fs::path& dir) {
  const fs::path pending = dir / kPending;
  if (fs::exists(pending)) {
    const Json manifest = read_manifest(pending);
    for (const auto& name : manifest_files(manifest)) {
      const fs::path tmp = dir / (name + kTmpSuffix);
      if (fs::exists(tmp)) rename_file(tmp, dir / name);
    }
    rename_file(pending, dir / kManifest);
    sync_dir(dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && has_suffix(name, kTmpSuffix)) fs::remove(entry.path());
  }
}

TimeStamp now_millis() {
  using namespace std::chrono;
  return TimeStamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

std::optional<TimeStamp> json_time(const Json& j) {
  if (j.is_number_integer()) return TimeStamp{j.get<std::int64_t>()};
  if (j.is_string()) return parse_datetime(j.get<std::string>());
  return std::nullopt;
}

}  // namespace

bool valid_collection_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

bool valid_feature_id(std::string_view id) {
  if (id.empty() || id.size() > 256) return false;
  return std::none_of(id.begin(), id.end(), [](unsigned char c) { return c == '/' || c < 0x20 || c == 0x7f; });
}

FeatureRecord FeatureRecord::make(std::string fid, GeoMediaDocument doc) {
  FeatureRecord rec{std::move(fid), std::move(doc), std::nullopt, {}};
  rec.bbox = spatial_bbox(rec.doc);
  rec.extent = time_extent(rec.doc);
  return rec;
}

std::string_view to_string(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Text: return "text";
    case AnnotationKind::Icon: return "icon";
    case AnnotationKind::Polygon: return "polygon";
  }
  return "";
}

AnnotationKind annotation_kind_from_string(std::string_view s) {
  if (s == "text") return AnnotationKind::Text;
  if (s == "icon") return AnnotationKind::Icon;
  if (s == "polygon") return AnnotationKind::Polygon;
  throw Error(ErrorCode::BadAnnotation, "unknown annotation kind '" + std::string(s) + "'", "/kind");
}

Json annotation_to_json(const Annotation& a) {
  Json j = Json::object();
  j["id"] = a.aid;
  j["kind"] = to_string(a.kind);
  if (a.kind == AnnotationKind::Polygon) {
    Json body = Json::array();
    for (const auto& p : a.polygon) body.push_back(Json::array({p.x, p.y}));
    j["body"] = std::move(body);
  } else {
    j["body"] = a.text;
  }
  if (a.time_range) j["timeRange"] = Json::array({a.time_range->start.millis, a.time_range->end.millis});
  return j;
}

Annotation annotation_from_json(const Json& j) {
  auto bad = [](const std::string& msg, const std::string& path) { return Error(ErrorCode::BadAnnotation, msg, path); };
  if (!j.is_object()) throw bad("annotation must be an object", "");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "kind" && key != "body" && key != "timeRange") throw bad("unknown member '" + key + "'", "/" + key);
  }
  Annotation a;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw bad("id must be a string", "/id");
    a.aid = j["id"].get<std::string>();
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw bad("kind must be a string", "/kind");
  a.kind = annotation_kind_from_string(j["kind"].get<std::string>());
  if (!j.contains("body")) throw bad("missing body", "/body");
  const Json& body = j["body"];
  if (a.kind == AnnotationKind::Polygon) {
    if (!body.is_array()) throw bad("polygon body must be a list of [x, y]", "/body");
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Json& v = body[i];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw bad("vertex must be [x, y]", "/body/" + std::to_string(i));
      }
      a.polygon.push_back({v[0].get<double>(), v[1].get<double>()});
    }
  } else {
    if (!body.is_string()) throw bad("body must be a string", "/body");
    a.text = body.get<std::string>();
  }
  if (j.contains("timeRange")) {
    const Json& tr = j["timeRange"];
    std::optional<TimeStamp> s, e;
    try {
      if (tr.is_array() && tr.size() == 2) {
        s = json_time(tr[0]);
        e = json_time(tr[1]);
      }
    } catch (const Error& err) {
      throw bad(err.what(), "/timeRange");
    }
    if (!s || !e) throw bad("timeRange must be [start, end]", "/timeRange");
    if (*e < *s) throw bad("timeRange end precedes start", "/timeRange");
    a.time_range = TimeInterval{*s, *e};
  }
  return a;
}

// ---- index maintenance ---------------------------------------------------

void MediaStore::CollectionState::index(const FeatureRecord& rec) {
  if (rec.bbox) spatial.insert(*rec.bbox, rec.fid);
  IntervalEntry e{rec.extent, rec.fid};
  auto it = std::lower_bound(temporal.begin(), temporal.end(), e, [](const IntervalEntry& a, const IntervalEntry& b) {
    return std::tie(a.iv.start, a.fid) < std::tie(b.iv.start, b.fid);
  });
  temporal.insert(it, std::move(e));
}

void MediaStore::CollectionState::unindex(const FeatureRecord& rec) {
  if (rec.bbox) spatial.remove(*rec.bbox, rec.fid);
  auto it = std::find_if(temporal.begin(), temporal.end(), [&](const IntervalEntry& e) { return e.fid == rec.fid; });
  if (it != temporal.end()) temporal.erase(it);
}

MediaStore::CollectionState& MediaStore::state(const std::string& cid) {
  auto it = collections_.find(cid);
  if (it == collections_.end()) throw Error(ErrorCode::NotFound, "no collection '" + cid + "'");
  return it->second;
}

const MediaStore::CollectionState& MediaStore::state(const std::string& cid) const {
  return const_cast<MediaStore*>(this)->state(cid);
}

void MediaStore::commit(const Undo& undo) {
  if (!dir_) return;
  try {
    flush_locked(*dir_, {});
  } catch (...) {
    undo();
    throw;
  }
}

// ---- collections ---------------------------------------------------------

Collection MediaStore::create_collection(const std::string& id, const std::string& title, MediaKind media_type,
                                         std::optional<TimeStamp> created) {
  if (!valid_collection_id(id)) {
    throw Error(ErrorCode::InvalidArgument, "collection id must match [A-Za-z0-9_-]{1,64}", "/id");
  }
  std::unique_lock lock(mu_);
  if (collections_.count(id)) throw Error(ErrorCode::DuplicateId, "collection '" + id + "' already exists");
  CollectionState cs;
  cs.meta = Collection{id, title, media_type, created.value_or(now_millis())};
  const Collection out = cs.meta;
  collections_.emplace(id, std::move(cs));
  commit([&] { collections_.erase(id); });
  return out;
}

void MediaStore::delete_collection(const std::string& id) {
  std::unique_lock lock(mu_);
  auto it = collections_.find(id);
  if (it == collections_.end()) throw Error(ErrorCode::NotFound, "no collection '" + id + "'");
  CollectionState saved = std::move(it->second);
  collections_.erase(it);
  commit([&] { collections_.emplace(id, std::move(saved)); });
}

std::vector<Collection> MediaStore::list_collections() const {
  std::shared_lock lock(mu_);
  std::vector<Collection> out;
  for (const auto& [_, cs] : collections_) out.push_back(cs.meta);
  return out;
}

Collection MediaStore::get_collection(const std::string& id) const {
  std::shared_lock lock(mu_);
  return state(id).meta;
}

CollectionSummary MediaStore::summarize(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto& cs = state(id);
  CollectionSummary s{cs.meta, cs.features.size(), std::nullopt, std::nullopt};
  for (const auto& [_, rec] : cs.features) {
    if (rec.bbox) {
      if (s.bbox) {
        s.bbox->expand(*rec.bbox);
      } else {
        s.bbox = rec.bbox;
      }
    }
    if (s.extent) {
      s.extent->start = std::min(s.extent->start, rec.extent.start);
      s.extent->end = std::max(s.extent->end, rec.extent.end);
    } else {
      s.extent = rec.extent;
    }
  }
  return s;
}

// ---- features ------------------------------------------------------------

FeatureRecord MediaStore::put_feature(const std::string& cid, const std::string& fid, GeoMediaDocument doc) {
  if (!valid_feature_id(fid)) throw Error(ErrorCode::InvalidArgument, "invalid feature id '" + fid + "'");
  FeatureRecord rec = FeatureRecord::make(fid, std::move(doc));
  std::unique_lock lock(mu_);
  auto& cs = state(cid);
  if (rec.doc.kind() != cs.meta.media_type) {
    throw Error(ErrorCode::KindMismatch, "collection '" + cid + "' holds " + std::string(to_string(cs.meta.media_type)) +
                                             ", got " + std::string(to_string(rec.doc.kind())),
                "/type");
  }
  std::optional<FeatureRecord> previous;
  std::map<std::string, Annotation> previous_annotations;
  if (auto it = cs.features.find(fid); it != cs.features.end()) {
    previous = std::move(it->second);
    cs.unindex(*previous);
    cs.features.erase(it);
  }
  // Annotations whose time range no longer fits the new extent are dropped.
  if (auto ait = cs.annotations.find(fid); ait != cs.annotations.end()) {
    previous_annotations = ait->second;
    for (auto a = ait->second.begin(); a != ait->second.end();) {
      if (a->second.time_range && !(rec.doc.kind() == MediaKind::MovingVideo && rec.extent.contains(*a->second.time_range))) {
        a = ait->second.erase(a);
      } else {
        ++a;
      }
    }
  }
  cs.index(rec);
  cs.features.emplace(fid, rec);
  commit([&] {
    cs.unindex(rec);
    cs.features.erase(fid);
    if (previous) {
      cs.index(*previous);
      cs.features.emplace(fid, std::move(*previous));
      cs.annotations[fid] = std::move(previous_annotations);
    }
  });
  return rec;
}

FeatureRecord MediaStore::get_feature(const std::string& cid, const std::string& fid) const {
  std::shared_lock lock(mu_);
  const auto& cs = state(cid);
  auto it = cs.features.find(fid);
  if (it == cs.features.end()) throw Error(ErrorCode::NotFound, "no feature '" + fid + "' in '" + cid + "'");
  return it->second;
}

void MediaStore::delete_feature(const std::string& cid, const std::string& fid) {
  std::unique_lock lock(mu_);
  auto& cs = state(cid);
  auto it = cs.features.find(fid);
  if (it == cs.features.end()) throw Error(ErrorCode::NotFound, "no feature '" + fid + "' in '" + cid + "'");
  FeatureRecord saved = std::move(it->second);
  cs.features.erase(it);
  cs.unindex(saved);
  std::optional<std::map<std::string, Annotation>> saved_annotations;
  if (auto ait = cs.annotations.find(fid); ait != cs.annotations.end()) {
    saved_annotations = std::move(ait->second);
    cs.annotations.erase(ait);
  }
  commit([&] {
    cs.index(saved);
    cs.features.emplace(fid, std::move(saved));
    if (saved_annotations) cs.annotations.emplace(fid, std::move(*saved_annotations));
  });
}

std::vector<FeatureRecord> MediaStore::all_features(const std::string& cid) const {
  std::shared_lock lock(mu_);
  std::vector<FeatureRecord> out;
  for (const auto& [_, rec] : state(cid).features) out.push_back(rec);
  return out;
}

std::vector<FeatureRecord> MediaStore::candidates_locked(const CollectionState& cs, const std::optional<BBox>& bbox,
                                                         const std::optional<TimeInterval>& interval) const {
  if (bbox && !bbox->valid()) throw Error(ErrorCode::BadQuery, "inverted bbox");
  if (interval && interval->end < interval->start) throw Error(ErrorCode::BadQuery, "interval end precedes start");

  std::vector<const std::string*> fids;
  if (bbox) {
    cs.spatial.search(*bbox, [&](const BBox&, const std::string& fid) { fids.push_back(&fid); });
  } else if (interval) {
    for (const auto& e : cs.temporal) {
      if (interval->end < e.iv.start) break;
      if (!(e.iv.end < interval->start)) fids.push_back(&e.fid);
    }
  } else {
    for (const auto& [fid, _] : cs.features) fids.push_back(&fid);
  }
  std::sort(fids.begin(), fids.end(), [](const std::string* a, const std::string* b) { return *a < *b; });

  std::vector<FeatureRecord> out;
  for (const std::string* fid : fids) {
    const FeatureRecord& rec = cs.features.at(*fid);
    if (interval && !rec.extent.overlaps(*interval)) continue;
    if (bbox && !(rec.bbox && rec.bbox->intersects(*bbox))) continue;
    out.push_back(rec);
  }
  return out;
}

std::vector<FeatureRecord> MediaStore::candidates(const std::string& cid, const std::optional<BBox>& bbox,
                                                  const std::optional<TimeInterval>& interval) const {
  std::shared_lock lock(mu_);
  return candidates_locked(state(cid), bbox, interval);
}

StQueryResult MediaStore::st_query(const std::string& cid, const std::optional<BBox>& bbox,
                                   const std::optional<TimeInterval>& interval, std::size_t limit,
                                   std::size_t offset) const {
  if (limit < 1) throw Error(ErrorCode::BadQuery, "limit must be at least 1");
  std::vector<FeatureRecord> all = candidates(cid, bbox, interval);
  StQueryResult res;
  res.number_matched = all.size();
  for (std::size_t i = offset; i < all.size() && res.features.size() < limit; ++i) res.features.push_back(std::move(all[i]));
  return res;
}

// ---- annotations ---------------------------------------------------------

Annotation MediaStore::put_annotation(const std::string& cid, const std::string& fid, Annotation ann) {
  std::unique_lock lock(mu_);
  auto& cs = state(cid);
  auto fit = cs.features.find(fid);
  if (fit == cs.features.end()) throw Error(ErrorCode::NotFound, "no feature '" + fid + "' in '" + cid + "'");
  const FeatureRecord& rec = fit->second;

  if (ann.kind == AnnotationKind::Polygon) {
    if (ann.polygon.size() < 3) throw Error(ErrorCode::BadAnnotation, "polygon needs at least 3 vertices", "/body");
  } else if (ann.text.empty()) {
    throw Error(ErrorCode::BadAnnotation, "annotation body must not be empty", "/body");
  }
  if (ann.time_range) {
    if (rec.doc.kind() != MediaKind::MovingVideo) {
      throw Error(ErrorCode::BadAnnotation, "timeRange is only allowed on video features", "/timeRange");
    }
    if (!rec.extent.contains(*ann.time_range)) {
      throw Error(ErrorCode::BadAnnotation, "timeRange lies outside the video extent", "/timeRange");
    }
  }

  auto& bucket = cs.annotations[fid];
  const std::uint64_t saved_next = cs.next_aid;
  if (ann.aid.empty()) {
    do {
      ann.aid = "a" + std::to_string(cs.next_aid++);
    } while (bucket.count(ann.aid));
  } else if (!valid_feature_id(ann.aid)) {
    throw Error(ErrorCode::BadAnnotation, "invalid annotation id '" + ann.aid + "'", "/id");
  }
  std::optional<Annotation> previous;
  if (auto it = bucket.find(ann.aid); it != bucket.end()) previous = it->second;
  bucket[ann.aid] = ann;
  commit([&] {
    cs.next_aid = saved_next;
    if (previous) {
      bucket[ann.aid] = *previous;
    } else {
      bucket.erase(ann.aid);
    }
  });
  return ann;
}

std::vector<Annotation> MediaStore::list_annotations(const std::string& cid, const std::string& fid) const {
  std::shared_lock lock(mu_);
  const auto& cs = state(cid);
  if (!cs.features.count(fid)) throw Error(ErrorCode::NotFound, "no feature '" + fid + "' in '" + cid + "'");
  std::vector<Annotation> out;
  if (auto it = cs.annotations.find(fid); it != cs.annotations.end()) {
    for (const auto& [_, a] : it->second) out.push_back(a);
  }
  return out;
}

Annotation MediaStore::get_annotation(const std::string& cid, const std::string& fid, const std::string& aid) const {
  for (auto& a : list_annotations(cid, fid)) {
    if (a.aid == aid) return a;
  }
  throw Error(ErrorCode::NotFound, "no annotation '" + aid + "' on '" + fid + "'");
}

void MediaStore::delete_annotation(const std::string& cid, const std::string& fid, const std::string& aid) {
  std::unique_lock lock(mu_);
  auto& cs = state(cid);
  if (!cs.features.count(fid)) throw Error(ErrorCode::NotFound, "no feature '" + fid + "' in '" + cid + "'");
  auto bit = cs.annotations.find(fid);
  if (bit == cs.annotations.end() || !bit->second.count(aid)) {
    throw Error(ErrorCode::NotFound, "no annotation '" + aid + "' on '" + fid + "'");
  }
  Annotation saved = bit->second.at(aid);
  bit->second.erase(aid);
  commit([&] { cs.annotations[fid][aid] = saved; });
}

bool MediaStore::check_consistency() const {
  std::shared_lock lock(mu_);
  for (const auto& [cid, cs] : collections_) {
    if (!cs.spatial.check_invariants()) return false;
    std::size_t with_bbox = 0;
    for (const auto& [fid, rec] : cs.features) {
      if (rec.fid != fid) return false;
      if (rec.bbox != spatial_bbox(rec.doc) || rec.extent != time_extent(rec.doc)) return false;
      if (rec.bbox) {
        ++with_bbox;
        bool found = false;
        cs.spatial.search(*rec.bbox, [&](const BBox& b, const std::string& f) { found = found || (f == fid && b == *rec.bbox); });
        if (!found) return false;
      }
    }
    if (cs.spatial.size() != with_bbox || cs.temporal.size() != cs.features.size()) return false;
  }
  return true;
}

// ---- persistence ---------------------------------------------------------
//
// Flush writes every data file as <name>.tmp, then manifest.pending (the
// commit point), then renames the data files and finally the manifest.
// recover() finishes a flush that reached manifest.pending and discards one
// that did not, so a reader only ever sees a complete old or new state.

void MediaStore::flush(const fs::path& dir, const FlushFaultHook& hook) const {
  std::shared_lock lock(mu_);
  flush_locked(dir, hook);
}

void MediaStore::flush_locked(const fs::path& dir, const FlushFaultHook& hook) const {
  auto step = [&](std::string_view name) {
    if (hook) hook(name);
  };
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  recover(dir);

  Json manifest = Json::object();
  manifest["format"] = kFormat;
  manifest["version"] = kFormatVersion;
  manifest["collections"] = Json::array();
  std::vector<std::string> names;

  for (const auto& [cid, cs] : collections_) {
    std::string features, annotations;
    std::size_t ann_lines = 0;
    for (const auto& [fid, rec] : cs.features) {
      Json line = Json::object();
      line["fid"] = fid;
      line["document"] = to_json(rec.doc, TimeStyle::Epoch);
      features += line.dump();
      features += '\n';
    }
    for (const auto& [fid, bucket] : cs.annotations) {
      for (const auto& [_, a] : bucket) {
        Json line = Json::object();
        line["fid"] = fid;
        line["annotation"] = annotation_to_json(a);
        annotations += line.dump();
        annotations += '\n';
        ++ann_lines;
      }
    }
    const std::string fname = cid + ".ndjson";
    const std::string aname = cid + ".ann.ndjson";
    step("write " + fname);
    write_synced(dir / (fname + kTmpSuffix), features);
    step("write " + aname);
    write_synced(dir / (aname + kTmpSuffix), annotations);
    names.push_back(fname);
    names.push_back(aname);

    Json c = Json::object();
    c["id"] = cs.meta.id;
    c["title"] = cs.meta.title;
    c["mediaType"] = to_string(cs.meta.media_type);
    c["created"] = cs.meta.created.millis;
    c["nextAnnotation"] = cs.next_aid;
    c["features"] = file_entry(fname, features, cs.features.size());
    c["annotations"] = file_entry(aname, annotations, ann_lines);
    manifest["collections"].push_back(std::move(c));
  }

  step("write manifest.pending");
  write_synced(dir / (std::string(kPending) + kTmpSuffix), manifest.dump(2) + "\n");
  sync_dir(dir);
  step("commit manifest.pending");
  rename_file(dir / (std::string(kPending) + kTmpSuffix), dir / kPending);
  sync_dir(dir);
  for (const auto& name : names) {
    step("rename " + name);
    rename_file(dir / (name + kTmpSuffix), dir / name);
  }
  step("rename manifest");
  rename_file(dir / kPending, dir / kManifest);
  sync_dir(dir);

  step("cleanup");
  const std::set<std::string> keep(names.begin(), names.end());
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && has_suffix(name, ".ndjson") && !keep.count(name)) fs::remove(entry.path());
  }
}

std::map<std::string, MediaStore::CollectionState> MediaStore::read_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "store directory '" + dir.string() + "' does not exist");
  }
  recover(dir);
  if (!fs::exists(dir / kManifest)) throw Error(ErrorCode::IoError, "no store manifest in '" + dir.string() + "'");
  const Json manifest = read_manifest(dir / kManifest);

  auto load_file = [&](const Json& entry) {
    const std::string name = entry.at("name").get<std::string>();
    const fs::path p = dir / name;
    if (!fs::exists(p)) corrupt("missing data file '" + name + "'");
    std::string body = read_all(p);
    if (body.size() != entry.at("bytes").get<std::size_t>() || hex64(fnv1a64(body)) != entry.at("fnv1a64").get<std::string>()) {
      corrupt("data file '" + name + "' does not match the manifest");
    }
    std::vector<std::string> lines;
    std::istringstream in(body);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    if (lines.size() != entry.at("lines").get<std::size_t>()) corrupt("line count mismatch in '" + name + "'");
    return std::make_pair(name, lines);
  };

  std::map<std::string, CollectionState> out;
  try {
    for (const auto& c : manifest.at("collections")) {
      CollectionState cs;
      cs.meta.id = c.at("id").get<std::string>();
      cs.meta.title = c.at("title").get<std::string>();
      cs.meta.media_type = media_kind_from_string(c.at("mediaType").get<std::string>());
      cs.meta.created = TimeStamp{c.at("created").get<std::int64_t>()};
      cs.next_aid = c.at("nextAnnotation").get<std::uint64_t>();
      if (!valid_collection_id(cs.meta.id) || out.count(cs.meta.id)) corrupt("bad collection id in manifest");

      const auto [fname, flines] = load_file(c.at("features"));
      for (std::size_t i = 0; i < flines.size(); ++i) {
        try {
          const Json line = Json::parse(flines[i]);
          FeatureRecord rec = FeatureRecord::make(line.at("fid").get<std::string>(), document_from_json(line.at("document")));
          if (rec.doc.kind() != cs.meta.media_type || cs.features.count(rec.fid)) corrupt("bad record");
          cs.index(rec);
          cs.features.emplace(rec.fid, std::move(rec));
        } catch (const std::exception& e) {
          corrupt(fname + ":" + std::to_string(i + 1) + ": " + e.what());
        }
      }
      const auto [aname, alines] = load_file(c.at("annotations"));
      for (std::size_t i = 0; i < alines.size(); ++i) {
        try {
          const Json line = Json::parse(alines[i]);
          const std::string fid = line.at("fid").get<std::string>();
          Annotation a = annotation_from_json(line.at("annotation"));
          if (!cs.features.count(fid) || a.aid.empty()) corrupt("annotation for unknown feature");
          cs.annotations[fid][a.aid] = std::move(a);
        } catch (const std::exception& e) {
          corrupt(aname + ":" + std::to_string(i + 1) + ": " + e.what());
        }
      }
      out.emplace(cs.meta.id, std::move(cs));
    }
  } catch (const Json::exception& e) {
    corrupt(std::string("malformed manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptStore || e.code() == ErrorCode::IoError) throw;
    corrupt(std::string("malformed manifest: ") + e.what());
  }
  return out;
}

void MediaStore::init(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  recover(dir);
  if (fs::exists(dir / kManifest)) return;
  MediaStore empty;
  empty.flush(dir);
}

void MediaStore::load(const fs::path& dir) {
  auto loaded = read_dir(dir);
  std::unique_lock lock(mu_);
  collections_ = std::move(loaded);
  dir_.reset();
}

void MediaStore::open(const fs::path& dir) {
  auto loaded = read_dir(dir);
  std::unique_lock lock(mu_);
  collections_ = std::move(loaded);
  dir_ = dir;
}

}  // namespace geocms
