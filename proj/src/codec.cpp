#include "geocms/codec.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <set>

namespace geocms {

namespace {

bool read_digits(std::string_view s, std::size_t& pos, std::size_t min_len, std::size_t max_len, int& out) {
  std::size_t end = pos;
  while (end < s.size() && end - pos < max_len && s[end] >= '0' && s[end] <= '9') ++end;
  if (end - pos < min_len) return false;
  std::from_chars(s.data() + pos, s.data() + end, out);
  pos = end;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) return false;
  ++pos;
  return true;
}

}  // namespace

TimeStamp parse_datetime(std::string_view s) {
  auto bad = [&](const char* why) {
    return Error(ErrorCode::BadDateTime, "bad datetime '" + std::string(s) + "': " + why);
  };
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (!read_digits(s, pos, 4, 4, y) || !expect(s, pos, '-') || !read_digits(s, pos, 1, 2, mo) ||
      !expect(s, pos, '-') || !read_digits(s, pos, 1, 2, d)) {
    throw bad("expected YYYY-MM-DD");
  }
  if (!expect(s, pos, 'T') || !read_digits(s, pos, 2, 2, h) || !expect(s, pos, ':') ||
      !read_digits(s, pos, 2, 2, mi) || !expect(s, pos, ':') || !read_digits(s, pos, 2, 2, sec)) {
    throw bad("expected Thh:mm:ss");
  }
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    if (!read_digits(s, pos, 1, 3, ms)) throw bad("expected 1-3 fraction digits");
    for (std::size_t n = pos - start; n < 3; ++n) ms *= 10;
  }
  if (!expect(s, pos, 'Z')) throw bad("UTC designator 'Z' required");
  if (pos != s.size()) throw bad("trailing characters");

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw bad("no such calendar date");
  if (h > 23 || mi > 59 || sec > 59) throw bad("time of day out of range");

  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t millis = static_cast<std::int64_t>(days_since_epoch) * 86'400'000LL +
                              (static_cast<std::int64_t>(h) * 3600 + mi * 60 + sec) * 1000LL + ms;
  return TimeStamp{millis};
}

std::string epoch_to_iso(TimeStamp t) {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{t.millis}};
  const auto dp = floor<days>(tp);
  const year_month_day ymd{dp};
  const std::int64_t rem = (tp - dp).count();
  const auto hours = rem / 3'600'000;
  const auto minutes = rem / 60'000 % 60;
  const auto seconds = rem / 1000 % 60;
  const auto millis = rem % 1000;

  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(hours), static_cast<int>(minutes), static_cast<int>(seconds));
  if (millis != 0) n += std::snprintf(buf + n, sizeof buf - n, ".%03d", static_cast<int>(millis));
  std::snprintf(buf + n, sizeof buf - n, "Z");
  return buf;
}

std::string_view to_string(InterpolationMode mode) {
  switch (mode) {
    case InterpolationMode::Discrete: return "discrete";
    case InterpolationMode::Linear: return "linear";
    case InterpolationMode::Stepwise: return "stepwise";
  }
  return "";
}

InterpolationMode interpolation_from_string(std::string_view s) {
  std::string key(s);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  if (key == "discrete") return InterpolationMode::Discrete;
  if (key == "linear") return InterpolationMode::Linear;
  if (key == "stepwise") return InterpolationMode::Stepwise;
  throw Error(ErrorCode::BadFieldValue, "unsupported interpolation '" + std::string(s) + "'", "/interpolation");
}

// ---------------------------------------------------------------------------
// Strict JSON text parsing

namespace {

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

struct Frame {
  bool object = false;
  std::set<std::string> keys;
  std::string key;
  std::size_t index = 0;
};

std::string frames_to_pointer(const std::vector<Frame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += '/';
    out += f.object ? escape_pointer_token(f.key) : std::to_string(f.index);
  }
  return out;
}

}  // namespace

Json parse_strict_json(std::string_view text) {
  std::vector<Frame> frames;
  auto advance_parent = [&] {
    if (!frames.empty() && !frames.back().object) ++frames.back().index;
  };
  Json::parser_callback_t cb = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        frames.push_back(Frame{true, {}, {}, 0});
        break;
      case Json::parse_event_t::array_start:
        frames.push_back(Frame{false, {}, {}, 0});
        break;
      case Json::parse_event_t::key: {
        auto& top = frames.back();
        top.key = parsed.get<std::string>();
        if (!top.keys.insert(top.key).second) {
          throw Error(ErrorCode::BadJson, "duplicate member '" + top.key + "'", frames_to_pointer(frames));
        }
        break;
      }
      case Json::parse_event_t::object_end:
      case Json::parse_event_t::array_end:
        frames.pop_back();
        advance_parent();
        break;
      case Json::parse_event_t::value:
        advance_parent();
        break;
    }
    return true;
  };
  try {
    return Json::parse(text.begin(), text.end(), cb, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::BadJson, e.what(), frames_to_pointer(frames));
  }
}

// ---------------------------------------------------------------------------
// Document decoding

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& path, const std::string& message) {
  throw Error(code, message, path);
}

const Json* member(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_at(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(ErrorCode::BadFieldValue, path, "expected a number");
  return v.get<double>();
}

const Json& array_at(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(ErrorCode::BadFieldValue, path, "expected an array");
  return v;
}

std::string string_at(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(ErrorCode::BadFieldValue, path, "expected a string");
  return v.get<std::string>();
}

GeoPoint position_at(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() < 2 || v.size() > 3) {
    fail(ErrorCode::BadFieldValue, path, "a position is [lon, lat] or [lon, lat, alt]");
  }
  GeoPoint p{number_at(v[0], path + "/0"), number_at(v[1], path + "/1"), std::nullopt};
  if (v.size() == 3) p.alt = number_at(v[2], path + "/2");
  if (!(p.lon >= -180.0 && p.lon <= 180.0)) fail(ErrorCode::BadFieldValue, path + "/0", "longitude out of range");
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) fail(ErrorCode::BadFieldValue, path + "/1", "latitude out of range");
  return p;
}

std::vector<GeoPoint> positions_at(const Json& v, const std::string& path) {
  const Json& arr = array_at(v, path);
  if (arr.empty()) fail(ErrorCode::BadFieldValue, path, "at least one position is required");
  std::vector<GeoPoint> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(position_at(arr[i], path + "/" + std::to_string(i)));
  const bool alt = out.front().alt.has_value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].alt.has_value() != alt) {
      fail(ErrorCode::BadFieldValue, path + "/" + std::to_string(i), "altitude must be given on all positions or none");
    }
  }
  return out;
}

struct Timeline {
  std::vector<TimeStamp> times;
  std::string path;
};

// Reads either "datetimes" (ISO strings) or "timeline" (integer millis).
Timeline read_times(const Json& obj) {
  const Json* iso = member(obj, "datetimes");
  const Json* ints = member(obj, "timeline");
  if (iso && ints) fail(ErrorCode::BadFieldValue, "/timeline", "'datetimes' and 'timeline' are mutually exclusive");
  if (!iso && !ints) fail(ErrorCode::BadFieldValue, "/timeline", "missing 'timeline' or 'datetimes'");

  Timeline out;
  out.path = iso ? "/datetimes" : "/timeline";
  const Json& arr = array_at(iso ? *iso : *ints, out.path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = out.path + "/" + std::to_string(i);
    if (iso) {
      try {
        out.times.push_back(parse_datetime(string_at(arr[i], p)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BadDateTime) throw;
        fail(ErrorCode::BadDateTime, p, e.what());
      }
    } else {
      if (!arr[i].is_number_integer()) fail(ErrorCode::BadFieldValue, p, "timeline entries must be integers");
      out.times.push_back(TimeStamp{arr[i].get<std::int64_t>()});
    }
  }
  for (std::size_t i = 1; i < out.times.size(); ++i) {
    if (!(out.times[i - 1] < out.times[i])) {
      fail(ErrorCode::NonIncreasingTime, out.path + "/" + std::to_string(i), "times must be strictly increasing");
    }
  }
  return out;
}

void check_length(std::size_t expected, std::size_t actual, const std::string& path, const char* what) {
  if (expected != actual) {
    fail(ErrorCode::LengthMismatch, path,
         std::string(what) + " has " + std::to_string(actual) + " entries, expected " + std::to_string(expected));
  }
}

InterpolationMode read_interpolation(const Json& obj) {
  const Json* v = member(obj, "interpolation");
  if (!v) return InterpolationMode::Linear;
  return interpolation_from_string(string_at(*v, "/interpolation"));
}

FieldOfView read_fov(const Json& v, const std::string& path) {
  if (!v.is_object()) fail(ErrorCode::BadFieldValue, path, "a field of view is an object");
  FieldOfView fov;
  bool distance_seen = false;
  for (const auto& [key, val] : v.items()) {
    const std::string p = path + "/" + escape_pointer_token(key);
    if (key == "type") {
      if (string_at(val, p) != "fov") fail(ErrorCode::BadFieldValue, p, "field of view type must be 'fov'");
    } else if (key == "horizontalAngle") {
      fov.h_angle = number_at(val, p);
    } else if (key == "verticalAngle") {
      fov.v_angle = number_at(val, p);
    } else if (key == "direction2d") {
      fov.direction2d = number_at(val, p);
    } else if (key == "distance" || key == "viewDistance") {
      if (distance_seen) fail(ErrorCode::BadFieldValue, p, "give either 'distance' or 'viewDistance', not both");
      distance_seen = true;
      fov.view_distance = number_at(val, p);
    } else {
      fail(ErrorCode::BadFieldValue, p, "unknown field of view member '" + key + "'");
    }
  }
  try {
    fov.validate();
  } catch (const Error& e) {
    const std::string leaf = e.path() == "/viewDistance" && v.contains("distance") ? "/distance" : e.path();
    fail(e.code(), path + leaf, e.what());
  }
  return fov;
}

template <typename F>
auto rethrow_with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.path().empty()) throw;
    fail(e.code() == ErrorCode::InvalidArgument ? ErrorCode::BadFieldValue : e.code(), path, e.what());
  }
}

MovingPoint read_moving_point(const Json& obj) {
  const Json* coords = member(obj, "coordinates");
  if (!coords) fail(ErrorCode::BadFieldValue, "/coordinates", "missing 'coordinates'");
  auto positions = positions_at(*coords, "/coordinates");
  auto timeline = read_times(obj);
  check_length(positions.size(), timeline.times.size(), timeline.path, "time array");
  const auto mode = read_interpolation(obj);
  std::vector<PointSample> samples;
  samples.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) samples.push_back({timeline.times[i], positions[i]});
  return rethrow_with_path("/coordinates", [&] { return MovingPoint(std::move(samples), mode); });
}

MovingDouble read_moving_double(const Json& obj) {
  const Json* vals = member(obj, "values");
  if (!vals) fail(ErrorCode::BadFieldValue, "/values", "missing 'values'");
  const Json& arr = array_at(*vals, "/values");
  if (arr.empty()) fail(ErrorCode::BadFieldValue, "/values", "at least one value is required");
  auto timeline = read_times(obj);
  check_length(arr.size(), timeline.times.size(), timeline.path, "time array");
  std::vector<ValueSample> samples;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    samples.push_back({timeline.times[i], number_at(arr[i], "/values/" + std::to_string(i))});
  }
  std::optional<std::vector<GeoPoint>> track;
  if (const Json* coords = member(obj, "coordinates")) {
    track = positions_at(*coords, "/coordinates");
    check_length(arr.size(), track->size(), "/coordinates", "coordinates");
  }
  const auto mode = read_interpolation(obj);
  return rethrow_with_path("/values", [&] { return MovingDouble(std::move(samples), mode, std::move(track)); });
}

STPhoto read_stphoto(const Json& obj) {
  STPhoto photo;
  const Json* uri = member(obj, "uri");
  if (!uri) fail(ErrorCode::BadFieldValue, "/uri", "missing 'uri'");
  photo.uri = string_at(*uri, "/uri");
  if (photo.uri.empty()) fail(ErrorCode::BadFieldValue, "/uri", "uri must not be empty");
  const Json* coords = member(obj, "coordinates");
  if (!coords) fail(ErrorCode::BadFieldValue, "/coordinates", "missing 'coordinates'");
  photo.location = position_at(*coords, "/coordinates");
  auto timeline = read_times(obj);
  check_length(1, timeline.times.size(), timeline.path, "photo time array");
  photo.t = timeline.times.front();
  if (const Json* fov = member(obj, "fov")) photo.fov = read_fov(*fov, "/fov");
  photo.validate();
  return photo;
}

MovingVideo read_moving_video(const Json& obj) {
  const Json* uri = member(obj, "uri");
  if (!uri) fail(ErrorCode::BadFieldValue, "/uri", "missing 'uri'");
  std::string video_uri = string_at(*uri, "/uri");
  if (video_uri.empty()) fail(ErrorCode::BadFieldValue, "/uri", "uri must not be empty");
  MovingPoint track = read_moving_point(obj);

  std::vector<FieldOfView> fovs;
  if (const Json* fov = member(obj, "fov")) {
    if (fov->is_object()) {
      fovs.push_back(read_fov(*fov, "/fov"));
    } else {
      const Json& arr = array_at(*fov, "/fov");
      for (std::size_t i = 0; i < arr.size(); ++i) fovs.push_back(read_fov(arr[i], "/fov/" + std::to_string(i)));
    }
    if (fovs.size() != 1 && fovs.size() != track.size()) {
      fail(ErrorCode::LengthMismatch, "/fov",
           "fov list must hold 1 entry or " + std::to_string(track.size()) + " (one per sample)");
    }
  } else {
    fovs.emplace_back();
  }
  return MovingVideo(std::move(video_uri), std::move(track), std::move(fovs));
}

const std::set<std::string, std::less<>>& known_members(MediaKind kind) {
  static const std::set<std::string, std::less<>> point{"type", "coordinates", "datetimes", "timeline",
                                                        "interpolation"};
  static const std::set<std::string, std::less<>> dbl{"type",     "values",      "coordinates",
                                                      "datetimes", "timeline", "interpolation"};
  static const std::set<std::string, std::less<>> photo{"type", "uri", "coordinates", "datetimes", "timeline",
                                                        "fov"};
  static const std::set<std::string, std::less<>> video{"type",     "uri",      "coordinates",  "fov",
                                                        "datetimes", "timeline", "interpolation"};
  switch (kind) {
    case MediaKind::MovingPoint: return point;
    case MediaKind::MovingDouble: return dbl;
    case MediaKind::STPhoto: return photo;
    case MediaKind::MovingVideo: return video;
  }
  return point;
}

}  // namespace

GeoMediaDocument document_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::BadJson, "", "a GeoMedia document is a JSON object");
  const Json* type = member(j, "type");
  if (!type) fail(ErrorCode::UnknownType, "/type", "missing 'type'");
  const MediaKind kind = media_kind_from_string(string_at(*type, "/type"));

  auto payload = [&]() -> MediaPayload {
    switch (kind) {
      case MediaKind::MovingPoint: return read_moving_point(j);
      case MediaKind::MovingDouble: return read_moving_double(j);
      case MediaKind::STPhoto: return read_stphoto(j);
      case MediaKind::MovingVideo: return read_moving_video(j);
    }
    fail(ErrorCode::UnknownType, "/type", "unhandled media type");
  };
  GeoMediaDocument doc{payload()};
  const auto& known = known_members(kind);
  for (const auto& [key, val] : j.items()) {
    if (!known.contains(key)) doc.extras[key] = val;
  }
  return doc;
}

GeoMediaDocument parse_document(std::string_view text) { return document_from_json(parse_strict_json(text)); }

// ---------------------------------------------------------------------------
// Encoding

namespace {

Json position_json(const GeoPoint& p) {
  Json a = Json::array({p.lon, p.lat});
  if (p.alt) a.push_back(*p.alt);
  return a;
}

void put_times(Json& out, const std::vector<TimeStamp>& times, TimeStyle style) {
  Json arr = Json::array();
  for (auto t : times) {
    if (style == TimeStyle::Iso) {
      arr.push_back(epoch_to_iso(t));
    } else {
      arr.push_back(t.millis);
    }
  }
  out[style == TimeStyle::Iso ? "datetimes" : "timeline"] = std::move(arr);
}

Json encode(const MovingPoint& mp, TimeStyle style) {
  Json out;
  out["type"] = to_string(MediaKind::MovingPoint);
  Json coords = Json::array();
  std::vector<TimeStamp> times;
  for (const auto& s : mp.samples()) {
    coords.push_back(position_json(s.position));
    times.push_back(s.t);
  }
  out["coordinates"] = std::move(coords);
  put_times(out, times, style);
  out["interpolation"] = to_string(mp.mode());
  return out;
}

Json encode(const MovingDouble& md, TimeStyle style) {
  Json out;
  out["type"] = to_string(MediaKind::MovingDouble);
  Json values = Json::array();
  std::vector<TimeStamp> times;
  for (const auto& s : md.samples()) {
    values.push_back(s.value);
    times.push_back(s.t);
  }
  out["values"] = std::move(values);
  put_times(out, times, style);
  if (md.track()) {
    Json coords = Json::array();
    for (const auto& p : *md.track()) coords.push_back(position_json(p));
    out["coordinates"] = std::move(coords);
  }
  out["interpolation"] = to_string(md.mode());
  return out;
}

Json encode(const STPhoto& photo, TimeStyle style) {
  Json out;
  out["type"] = to_string(MediaKind::STPhoto);
  out["uri"] = photo.uri;
  out["coordinates"] = position_json(photo.location);
  put_times(out, {photo.t}, style);
  Json fov;
  fov["type"] = "fov";
  fov["horizontalAngle"] = photo.fov.h_angle;
  fov["verticalAngle"] = photo.fov.v_angle;
  if (photo.fov.direction2d) fov["direction2d"] = *photo.fov.direction2d;
  fov["distance"] = photo.fov.view_distance;
  out["fov"] = std::move(fov);
  return out;
}

Json encode(const MovingVideo& mv, TimeStyle style) {
  Json out;
  out["type"] = to_string(MediaKind::MovingVideo);
  out["uri"] = mv.uri();
  Json coords = Json::array();
  std::vector<TimeStamp> times;
  for (const auto& s : mv.track().samples()) {
    coords.push_back(position_json(s.position));
    times.push_back(s.t);
  }
  out["coordinates"] = std::move(coords);
  Json fovs = Json::array();
  for (const auto& f : mv.fovs()) {
    Json fj;
    fj["verticalAngle"] = f.v_angle;
    fj["horizontalAngle"] = f.h_angle;
    fj["viewDistance"] = f.view_distance;
    if (f.direction2d) fj["direction2d"] = *f.direction2d;
    fovs.push_back(std::move(fj));
  }
  out["fov"] = std::move(fovs);
  put_times(out, times, style);
  out["interpolation"] = to_string(mv.track().mode());
  return out;
}

}  // namespace

Json to_json(const GeoMediaDocument& doc, TimeStyle style) {
  Json out = std::visit([&](const auto& v) { return encode(v, style); }, doc.payload);
  for (const auto& [key, val] : doc.extras.items()) out[key] = val;
  return out;
}

std::string serialize_document(const GeoMediaDocument& doc, TimeStyle style) { return to_json(doc, style).dump(); }

Json geojson_point(const GeoPoint& p) {
  Json out;
  out["type"] = "Point";
  out["coordinates"] = position_json(p);
  return out;
}

Json geojson_polygon(const SectorPolygon& poly) {
  Json ring = Json::array();
  for (const auto& p : poly.ring) ring.push_back(position_json(p));
  Json out;
  out["type"] = "Polygon";
  out["coordinates"] = Json::array({std::move(ring)});
  return out;
}

namespace {

Json line_or_point(const std::vector<GeoPoint>& pts) {
  if (pts.size() == 1) return geojson_point(pts.front());
  Json coords = Json::array();
  for (const auto& p : pts) coords.push_back(position_json(p));
  Json out;
  out["type"] = "LineString";
  out["coordinates"] = std::move(coords);
  return out;
}

std::vector<GeoPoint> positions_of(const MovingPoint& mp) {
  std::vector<GeoPoint> out;
  for (const auto& s : mp.samples()) out.push_back(s.position);
  return out;
}

}  // namespace

Json geojson_geometry(const GeoMediaDocument& doc) {
  switch (doc.kind()) {
    case MediaKind::MovingPoint: return line_or_point(positions_of(std::get<MovingPoint>(doc.payload)));
    case MediaKind::MovingVideo: return line_or_point(positions_of(std::get<MovingVideo>(doc.payload).track()));
    case MediaKind::STPhoto: return geojson_point(std::get<STPhoto>(doc.payload).location);
    case MediaKind::MovingDouble: {
      const auto& md = std::get<MovingDouble>(doc.payload);
      return md.track() ? line_or_point(*md.track()) : Json();
    }
  }
  return Json();
}

}  // namespace geocms
