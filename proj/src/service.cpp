#include "geocms/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "geocms/geodesy.hpp"

namespace geocms {

namespace {

// An error already mapped to its HTTP form.
struct ApiError {
  int status;
  std::string code;
  std::string message;
};

ApiError bad_query(const std::string& msg) { return {400, "BadQuery", msg}; }
ApiError bad_body(const std::string& msg) { return {400, "BadBody", msg}; }

std::string with_pointer(const Error& e) {
  std::string msg = e.what();
  if (!e.path().empty()) msg += " (at " + e.path() + ")";
  return msg;
}

ApiError map_error(const Error& e, bool from_body) {
  switch (e.code()) {
    case ErrorCode::NotFound: return {404, "NotFound", e.what()};
    case ErrorCode::DuplicateId: return {409, "Conflict", e.what()};
    case ErrorCode::KindMismatch: return {422, "KindMismatch", e.what()};
    case ErrorCode::IoError:
    case ErrorCode::CorruptStore: return {500, "Internal", e.what()};
    default: break;
  }
  return from_body ? bad_body(with_pointer(e)) : bad_query(e.what());
}

ApiResponse json_response(int status, const Json& j) { return {status, j.dump(), "application/json"}; }

ApiResponse error_response(const ApiError& e, const std::string& path) {
  Json j = Json::object();
  j["httpStatus"] = e.status;
  j["code"] = e.code;
  j["message"] = e.message;
  j["path"] = path;
  return json_response(e.status, j);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw bad_query(what + ": '" + std::string(s) + "' is not a decimal number");
  }
  return v;
}

std::vector<double> parse_numbers(const std::string& s, std::size_t count, const std::string& what) {
  const auto parts = split(s, ',');
  if (parts.size() != count) throw bad_query(what + " needs " + std::to_string(count) + " comma-separated numbers");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_number(p, what));
  return out;
}

std::size_t parse_count(const std::string& s, const std::string& what, std::size_t min) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || v < min) {
    throw bad_query(what + " must be an integer >= " + std::to_string(min));
  }
  return v;
}

TimeStamp parse_instant(const std::string& s) {
  try {
    return parse_datetime(s);
  } catch (const Error& e) {
    throw bad_query(e.what());
  }
}

GeoPoint parse_lonlat(const std::string& s, const std::string& what) {
  const auto v = parse_numbers(s, 2, what);
  const GeoPoint p{v[0], v[1], std::nullopt};
  if (!p.valid()) throw bad_query(what + " outside lon/lat range");
  return p;
}

// Exactly the allowed parameter names, each at most once.
std::map<std::string, std::string> take_params(const std::vector<std::pair<std::string, std::string>>& params,
                                               const std::set<std::string>& allowed) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : params) {
    if (!allowed.count(k)) throw bad_query("unknown query parameter '" + k + "'");
    if (!out.emplace(k, v).second) throw bad_query("query parameter '" + k + "' given twice");
  }
  return out;
}

std::string url_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ',' || c == ':' || c == '/') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

Json link(const std::string& href, const std::string& rel) {
  Json j = Json::object();
  j["href"] = href;
  j["rel"] = rel;
  j["type"] = "application/json";
  return j;
}

Json bbox_json(const BBox& b) { return Json::array({b.min_lon, b.min_lat, b.max_lon, b.max_lat}); }

Json collection_json(const Collection& c) {
  Json j = Json::object();
  j["id"] = c.id;
  j["title"] = c.title;
  j["mediaType"] = to_string(c.media_type);
  j["created"] = epoch_to_iso(c.created);
  j["links"] = Json::array({link("/collections/" + c.id, "self"), link("/collections/" + c.id + "/items", "items")});
  return j;
}

Json feature_json(const FeatureRecord& r) {
  Json f = Json::object();
  f["type"] = "Feature";
  f["id"] = r.fid;
  f["geometry"] = geojson_geometry(r.doc);
  Json props = Json::object();
  props["mediaType"] = to_string(r.doc.kind());
  props["start"] = epoch_to_iso(r.extent.start);
  props["end"] = epoch_to_iso(r.extent.end);
  if (r.bbox) props["bbox"] = bbox_json(*r.bbox);
  props["document"] = to_json(r.doc, TimeStyle::Iso);
  f["properties"] = std::move(props);
  return f;
}

std::string interval_text(const TimeInterval& iv) { return epoch_to_iso(iv.start) + "/" + epoch_to_iso(iv.end); }

Json parse_body(const std::string& body) {
  try {
    return parse_strict_json(body);
  } catch (const Error& e) {
    throw bad_body(with_pointer(e));
  }
}

}  // namespace

TimeInterval parse_datetime_param(const std::string& s) {
  const auto parts = split(s, '/');
  if (parts.size() == 1) {
    const TimeStamp t = parse_instant(parts[0]);
    return {t, t};
  }
  if (parts.size() != 2 || (parts[0] == ".." && parts[1] == "..")) {
    throw bad_query("datetime must be an instant or start/end");
  }
  const TimeStamp start = parts[0] == ".." ? TimeStamp{std::numeric_limits<std::int64_t>::min()} : parse_instant(parts[0]);
  const TimeStamp end = parts[1] == ".." ? TimeStamp{std::numeric_limits<std::int64_t>::max()} : parse_instant(parts[1]);
  if (end < start) throw bad_query("datetime interval end precedes start");
  return {start, end};
}

QuerySpec parse_items_query(const std::vector<std::pair<std::string, std::string>>& params) {
  try {
    const auto p = take_params(params, {"bbox", "datetime", "near", "visibleFrom", "limit", "offset"});
    QuerySpec q;
    if (auto it = p.find("bbox"); it != p.end()) {
      const auto v = parse_numbers(it->second, 4, "bbox");
      q.bbox = BBox{v[0], v[1], v[2], v[3]};
    }
    if (auto it = p.find("datetime"); it != p.end()) q.interval = parse_datetime_param(it->second);
    if (auto it = p.find("near"); it != p.end()) {
      const auto v = parse_numbers(it->second, 3, "near");
      q.near = NearPoint{{v[0], v[1], std::nullopt}, v[2]};
    }
    if (auto it = p.find("visibleFrom"); it != p.end()) q.visible_from = parse_lonlat(it->second, "visibleFrom");
    if (auto it = p.find("limit"); it != p.end()) q.limit = parse_count(it->second, "limit", 1);
    if (auto it = p.find("offset"); it != p.end()) q.offset = parse_count(it->second, "offset", 0);
    q.validate();
    return q;
  } catch (const ApiError& e) {
    throw Error(ErrorCode::BadQuery, e.message);
  }
}

ApiResponse ApiService::handle(const ApiRequest& req) const {
  try {
    return route(req);
  } catch (const ApiError& e) {
    return error_response(e, req.path);
  } catch (const Error& e) {
    return error_response(map_error(e, false), req.path);
  } catch (const std::exception& e) {
    return error_response({500, "Internal", e.what()}, req.path);
  }
}

ApiResponse ApiService::route(const ApiRequest& req) const {
  std::vector<std::string> seg = split(req.path, '/');
  if (seg.empty() || !seg.front().empty()) throw ApiError{404, "NotFound", "no such resource"};
  seg.erase(seg.begin());
  if (!seg.empty() && seg.back().empty()) seg.pop_back();
  const std::string& m = req.method;
  auto not_allowed = [&]() { return ApiError{405, "BadQuery", "method " + m + " not allowed here"}; };
  auto no_params = [&] { take_params(req.params, {}); };

  // GET /
  if (seg.empty()) {
    if (m != "GET") throw not_allowed();
    no_params();
    Json j = Json::object();
    j["title"] = "geocms";
    j["description"] = "Geo-tagged media collections: trajectories, sensor series, photos and videos";
    j["links"] = Json::array({link("/", "self"), link("/collections", "data")});
    return json_response(200, j);
  }
  if (seg[0] != "collections") throw ApiError{404, "NotFound", "no such resource"};

  // /collections
  if (seg.size() == 1) {
    if (m == "GET") {
      no_params();
      Json list = Json::array();
      for (const auto& c : store_.list_collections()) list.push_back(collection_json(c));
      Json j = Json::object();
      j["collections"] = std::move(list);
      j["links"] = Json::array({link("/collections", "self")});
      return json_response(200, j);
    }
    if (m == "POST") {
      no_params();
      const Json body = parse_body(req.body);
      if (!body.is_object()) throw bad_body("body must be an object");
      for (const auto& [k, _] : body.items()) {
        if (k != "id" && k != "title" && k != "mediaType") throw bad_body("unknown member '" + k + "'");
      }
      if (!body.contains("id") || !body["id"].is_string()) throw bad_body("id must be a string");
      if (!body.contains("mediaType") || !body["mediaType"].is_string()) throw bad_body("mediaType must be a string");
      if (body.contains("title") && !body["title"].is_string()) throw bad_body("title must be a string");
      try {
        const MediaKind kind = media_kind_from_string(body["mediaType"].get<std::string>());
        const Collection c = store_.create_collection(body["id"].get<std::string>(), body.value("title", ""), kind);
        return json_response(201, collection_json(c));
      } catch (const Error& e) {
        throw map_error(e, true);
      }
    }
    throw not_allowed();
  }

  const std::string& cid = seg[1];

  // /collections/{cid}
  if (seg.size() == 2) {
    if (m == "GET") {
      no_params();
      const CollectionSummary s = store_.summarize(cid);
      Json j = collection_json(s.meta);
      j["numberOfFeatures"] = s.feature_count;
      Json extent = Json::object();
      extent["spatial"] = s.bbox ? bbox_json(*s.bbox) : Json(nullptr);
      extent["temporal"] = s.extent ? Json(interval_text(*s.extent)) : Json(nullptr);
      j["extent"] = std::move(extent);
      return json_response(200, j);
    }
    if (m == "DELETE") {
      no_params();
      store_.delete_collection(cid);
      return {204, "", "application/json"};
    }
    throw not_allowed();
  }
  if (seg[2] != "items") throw ApiError{404, "NotFound", "no such resource"};

  // /collections/{cid}/items
  if (seg.size() == 3) {
    if (m != "GET") throw not_allowed();
    const QuerySpec q = parse_items_query(req.params);
    const QueryResult res = evaluate(store_, cid, q);
    Json features = Json::array();
    for (const auto& r : res.features) features.push_back(feature_json(r));

    Json echo = Json::object();
    std::string qs;
    for (const auto& [k, v] : req.params) {
      echo[k] = v;
      if (k == "offset") continue;
      qs += (qs.empty() ? "" : "&") + k + "=" + url_encode(v);
    }
    const std::string base = "/collections/" + cid + "/items";
    const std::string sep = qs.empty() ? "" : "&";
    Json links = Json::array({link(base + "?" + qs + sep + "offset=" + std::to_string(q.offset), "self")});
    if (q.offset + res.features.size() < res.number_matched) {
      links.push_back(link(base + "?" + qs + sep + "offset=" + std::to_string(q.offset + res.features.size()), "next"));
    }

    Json j = Json::object();
    j["type"] = "FeatureCollection";
    j["features"] = std::move(features);
    j["numberMatched"] = res.number_matched;
    j["numberReturned"] = res.features.size();
    j["query"] = std::move(echo);
    j["links"] = std::move(links);
    return json_response(200, j);
  }

  const std::string& fid = seg[3];

  // /collections/{cid}/items/{fid}
  if (seg.size() == 4) {
    if (m == "GET") {
      const auto p = take_params(req.params, {"time"});
      TimeStyle style = TimeStyle::Iso;
      if (auto it = p.find("time"); it != p.end()) {
        if (it->second == "epoch") {
          style = TimeStyle::Epoch;
        } else if (it->second != "iso") {
          throw bad_query("time must be iso or epoch");
        }
      }
      return json_response(200, to_json(store_.get_feature(cid, fid).doc, style));
    }
    if (m == "PUT") {
      no_params();
      store_.get_collection(cid);
      GeoMediaDocument doc = [&] {
        try {
          return document_from_json(parse_body(req.body));
        } catch (const Error& e) {
          throw map_error(e, true);
        }
      }();
      bool existed = true;
      try {
        store_.get_feature(cid, fid);
      } catch (const Error&) {
        existed = false;
      }
      try {
        const FeatureRecord rec = store_.put_feature(cid, fid, std::move(doc));
        return json_response(existed ? 200 : 201, to_json(rec.doc, TimeStyle::Iso));
      } catch (const Error& e) {
        throw map_error(e, true);
      }
    }
    if (m == "DELETE") {
      no_params();
      store_.delete_feature(cid, fid);
      return {204, "", "application/json"};
    }
    throw not_allowed();
  }

  const std::string& leaf = seg[4];

  if (seg.size() == 5 && leaf == "position") {
    if (m != "GET") throw not_allowed();
    const auto p = take_params(req.params, {"at"});
    if (!p.count("at")) throw bad_query("missing 'at'");
    const TimeStamp t = parse_instant(p.at("at"));
    return json_response(200, geojson_point(position_at(store_.get_feature(cid, fid).doc, t)));
  }

  if (seg.size() == 5 && leaf == "fov") {
    if (m != "GET") throw not_allowed();
    const auto p = take_params(req.params, {"at"});
    const FeatureRecord rec = store_.get_feature(cid, fid);
    std::optional<TimeStamp> t;
    if (p.count("at")) t = parse_instant(p.at("at"));
    if (const auto* photo = std::get_if<STPhoto>(&rec.doc.payload)) {
      if (t && *t != photo->t) throw bad_query("photo was taken at " + epoch_to_iso(photo->t));
      return json_response(200, geojson_polygon(fov_sector_polygon(photo->location, photo->abs_direction(),
                                                                   effective_view(photo->fov))));
    }
    const auto* video = std::get_if<MovingVideo>(&rec.doc.payload);
    if (!video) throw bad_query(std::string("no field of view on a ") + std::string(to_string(rec.doc.kind())) + " feature");
    if (!t) throw bad_query("missing 'at'");
    const FovState st = fov_at(*video, *t);
    return json_response(200, geojson_polygon(fov_sector_polygon(st.camera, st.abs_direction, effective_view(st.fov))));
  }

  if (seg.size() == 5 && leaf == "visible") {
    if (m != "GET") throw not_allowed();
    const auto p = take_params(req.params, {"point", "step"});
    if (!p.count("point")) throw bad_query("missing 'point'");
    const GeoPoint pt = parse_lonlat(p.at("point"), "point");
    const std::int64_t step =
        p.count("step") ? static_cast<std::int64_t>(parse_count(p.at("step"), "step", 1)) : kDefaultSampleStepMs;
    const FeatureRecord rec = store_.get_feature(cid, fid);
    std::vector<TimeInterval> ivs;
    if (const auto* photo = std::get_if<STPhoto>(&rec.doc.payload)) {
      if (fov_contains(photo->location, photo->abs_direction(), effective_view(photo->fov), pt)) {
        ivs.push_back(TimeInterval::instant(photo->t));
      }
    } else if (const auto* video = std::get_if<MovingVideo>(&rec.doc.payload)) {
      ivs = visible_intervals(*video, pt, step);
    } else {
      throw bad_query(std::string("no field of view on a ") + std::string(to_string(rec.doc.kind())) + " feature");
    }
    Json list = Json::array();
    for (const auto& iv : ivs) list.push_back(interval_text(iv));
    Json j = Json::object();
    j["point"] = Json::array({pt.lon, pt.lat});
    j["step"] = step;
    j["intervals"] = std::move(list);
    return json_response(200, j);
  }

  if (leaf == "annotations" && seg.size() <= 6) {
    if (seg.size() == 5) {
      if (m == "GET") {
        no_params();
        Json list = Json::array();
        for (const auto& a : store_.list_annotations(cid, fid)) list.push_back(annotation_to_json(a));
        Json j = Json::object();
        j["annotations"] = std::move(list);
        return json_response(200, j);
      }
      if (m == "POST") {
        no_params();
        store_.get_feature(cid, fid);
        try {
          const Annotation a = store_.put_annotation(cid, fid, annotation_from_json(parse_body(req.body)));
          return json_response(201, annotation_to_json(a));
        } catch (const Error& e) {
          throw map_error(e, true);
        }
      }
      throw not_allowed();
    }
    const std::string& aid = seg[5];
    if (m == "GET") {
      no_params();
      return json_response(200, annotation_to_json(store_.get_annotation(cid, fid, aid)));
    }
    if (m == "DELETE") {
      no_params();
      store_.delete_annotation(cid, fid, aid);
      return {204, "", "application/json"};
    }
    throw not_allowed();
  }

  throw ApiError{404, "NotFound", "no such resource"};
}

// ---- HTTP adapter ------------------------------------------------------------

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const ApiService& api) : impl_(std::make_unique<Impl>()) {
  auto adapt = [&api](const httplib::Request& hreq, httplib::Response& hres) {
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.params.emplace_back(k, v);
    req.body = hreq.body;
    const ApiResponse res = api.handle(req);
    hres.status = res.status;
    if (res.status != 204) hres.set_content(res.body, res.content_type);
  };
  auto& s = impl_->server;
  s.Get(".*", adapt);
  s.Post(".*", adapt);
  s.Put(".*", adapt);
  s.Delete(".*", adapt);
  s.Patch(".*", adapt);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  const int bound = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() {
  if (!impl_->server.listen_after_bind()) throw Error(ErrorCode::IoError, "server stopped with an error");
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

std::pair<std::string, int> parse_listen_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::InvalidArgument, "address must be HOST:PORT, got '" + addr + "'");
  }
  const std::string host = addr.substr(0, colon);
  const std::string port_text = addr.substr(colon + 1);
  int port = -1;
  const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || ec != std::errc() || end != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::InvalidArgument, "bad port in '" + addr + "'");
  }
  return {host, port};
}

}  // namespace geocms
