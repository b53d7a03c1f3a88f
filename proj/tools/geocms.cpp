// geocms: ingest, query and serve geo-tagged media collections.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "geocms/geodesy.hpp"
#include "geocms/service.hpp"

using namespace geocms;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::BadQuery || e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFailure;
}

void report(const std::string& where, const Error& e) {
  std::cerr << "error: ";
  if (!where.empty()) std::cerr << where << ": ";
  std::cerr << to_string(e.code()) << ": " << e.what();
  if (!e.path().empty()) std::cerr << " (at " << e.path() << ")";
  std::cerr << "\n";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A document to analyze: either a file or a stored feature.
struct Source {
  std::string file;
  std::string store;
  std::string collection;
  std::string fid;

  void add_to(CLI::App* cmd) {
    cmd->add_option("file", file, "GeoMedia JSON file");
    cmd->add_option("--store", store, "Store directory")->envname("GEOCMS_STORE");
    cmd->add_option("--collection", collection, "Collection id");
    cmd->add_option("--fid", fid, "Feature id");
  }

  GeoMediaDocument load() const {
    if (!file.empty()) return parse_document(read_text(file));
    if (store.empty() || collection.empty() || fid.empty()) {
      throw Error(ErrorCode::InvalidArgument, "give a FILE or --store, --collection and --fid");
    }
    MediaStore s;
    s.load(store);
    return s.get_feature(collection, fid).doc;
  }
};

// "fid=path" names the feature explicitly; a plain path uses its stem.
std::pair<std::string, std::string> split_fid(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0 && !fs::exists(arg)) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {fs::path(arg).stem().string(), arg};
}

int run_ingest(const std::string& store_dir, const std::string& cid, bool create, const std::string& media_type,
               const std::string& title, const std::vector<std::string>& files) {
  MediaStore store;
  store.load(store_dir);
  bool exists = true;
  try {
    store.get_collection(cid);
  } catch (const Error&) {
    exists = false;
  }
  if (!exists) {
    if (!create) throw Error(ErrorCode::NotFound, "no collection '" + cid + "' (use --create)");
    if (media_type.empty()) throw Error(ErrorCode::InvalidArgument, "--create needs --media-type");
    store.create_collection(cid, title.empty() ? cid : title, media_kind_from_string(media_type));
  }
  std::size_t ok = 0, failed = 0;
  for (const auto& arg : files) {
    const auto [fid, path] = split_fid(arg);
    try {
      store.put_feature(cid, fid, parse_document(read_text(path)));
      ++ok;
    } catch (const Error& e) {
      report(path, e);
      ++failed;
    }
  }
  store.flush(store_dir);
  std::cout << ok << (ok == 1 ? " feature ingested" : " features ingested") << "\n";
  return failed ? kExitFailure : kExitOk;
}

int run_query(const std::string& store_dir, const std::string& cid,
              const std::vector<std::pair<std::string, std::string>>& params, const std::string& format) {
  const QuerySpec q = parse_items_query(params);
  MediaStore store;
  store.load(store_dir);
  const QueryResult res = evaluate(store, cid, q);
  if (format == "ids") {
    for (const auto& r : res.features) std::cout << r.fid << "\n";
  } else if (format == "geojson") {
    Json fc = Json::object();
    fc["type"] = "FeatureCollection";
    fc["features"] = Json::array();
    for (const auto& r : res.features) {
      Json f = Json::object();
      f["type"] = "Feature";
      f["id"] = r.fid;
      f["geometry"] = r.bbox ? geojson_point({(r.bbox->min_lon + r.bbox->max_lon) / 2, (r.bbox->min_lat + r.bbox->max_lat) / 2,
                                              std::nullopt})
                             : Json(nullptr);
      Json props = Json::object();
      props["mediaType"] = to_string(r.doc.kind());
      props["start"] = epoch_to_iso(r.extent.start);
      props["end"] = epoch_to_iso(r.extent.end);
      f["properties"] = std::move(props);
      fc["features"].push_back(std::move(f));
    }
    std::cout << fc.dump(2) << "\n";
  } else {
    for (const auto& r : res.features) {
      Json line = Json::object();
      line["id"] = r.fid;
      line["document"] = to_json(r.doc, TimeStyle::Iso);
      std::cout << line.dump() << "\n";
    }
  }
  return kExitOk;
}

int run_serve(const std::string& store_dir, const std::string& addr, bool init) {
  if (!fs::is_directory(store_dir)) {
    if (!init) throw Error(ErrorCode::IoError, "store directory '" + store_dir + "' does not exist (use --init)");
    MediaStore::init(store_dir);
  } else if (init) {
    MediaStore::init(store_dir);
  }
  MediaStore store;
  store.open(store_dir);
  const auto [host, port] = parse_listen_address(addr);

  // Handle SIGINT/SIGTERM on a dedicated thread so stop() runs outside a
  // signal handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ApiService api(store);
  HttpServer server(api);
  const int bound = server.bind(host, port);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.run();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Store, query and serve geo-tagged media (trajectories, sensor series, photos, videos)."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "geocms 0.1.0");

  std::string store_dir;
  auto add_store = [&](CLI::App* cmd) {
    cmd->add_option("--store", store_dir, "Store directory")->envname("GEOCMS_STORE")->required();
  };

  auto* init = app.add_subcommand("init", "Create an empty store");
  add_store(init);

  std::string cid, media_type, title;
  bool create = false;
  std::vector<std::string> files;
  auto* ingest = app.add_subcommand("ingest", "Add GeoMedia JSON files to a collection");
  add_store(ingest);
  ingest->add_option("--collection", cid, "Collection id")->required();
  ingest->add_flag("--create", create, "Create the collection if missing");
  ingest->add_option("--media-type", media_type, "MovingPoint, MovingDouble, stphoto or MovingVideo");
  ingest->add_option("--title", title, "Title for a created collection");
  ingest->add_option("files", files, "Files, optionally as FID=PATH")->required();

  std::string bbox, datetime, near, visible_from, format = "ids";
  std::optional<std::size_t> limit, offset;
  auto* query = app.add_subcommand("query", "Run a spatio-temporal query");
  add_store(query);
  query->add_option("--collection", cid, "Collection id")->required();
  query->add_option("--bbox", bbox, "minLon,minLat,maxLon,maxLat");
  query->add_option("--datetime", datetime, "Instant or start/end");
  query->add_option("--near", near, "lon,lat,radiusMeters");
  query->add_option("--visible-from", visible_from, "lon,lat");
  query->add_option("--limit", limit, "Page size (default 100)");
  query->add_option("--offset", offset, "Results to skip");
  query->add_option("--format", format, "ids, geojson or geomedia")
      ->check(CLI::IsMember({"ids", "geojson", "geomedia"}));

  Source at_src, fov_src, vis_src;
  std::string at_time, point;
  std::int64_t step = kDefaultSampleStepMs;
  auto* at = app.add_subcommand("at", "Position of a trajectory or video at a time (GeoJSON Point)");
  at_src.add_to(at);
  at->add_option("--at", at_time, "ISO datetime")->required();
  auto* fov = app.add_subcommand("fov", "View sector of a photo or video at a time (GeoJSON Polygon)");
  fov_src.add_to(fov);
  fov->add_option("--at", at_time, "ISO datetime (videos)");
  auto* visible = app.add_subcommand("visible", "Intervals during which a video sees a point");
  vis_src.add_to(visible);
  visible->add_option("--point", point, "lon,lat")->required();
  visible->add_option("--step", step, "Sample step in ms")->check(CLI::PositiveNumber);

  std::string to, convert_file;
  auto* convert = app.add_subcommand("convert", "Rewrite a document with ISO or epoch times");
  convert->add_option("--to", to, "iso or epoch")->required()->check(CLI::IsMember({"iso", "epoch"}));
  convert->add_option("file", convert_file, "GeoMedia JSON file")->required();

  std::string addr = "127.0.0.1:8080";
  bool serve_init = false;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_store(serve);
  serve->add_option("--addr", addr, "HOST:PORT")->envname("GEOCMS_ADDR");
  serve->add_flag("--init", serve_init, "Create the store if missing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*init) {
      MediaStore::init(store_dir);
      std::cout << "initialized " << store_dir << "\n";
      return kExitOk;
    }
    if (*ingest) return run_ingest(store_dir, cid, create, media_type, title, files);
    if (*query) {
      std::vector<std::pair<std::string, std::string>> params;
      if (!bbox.empty()) params.emplace_back("bbox", bbox);
      if (!datetime.empty()) params.emplace_back("datetime", datetime);
      if (!near.empty()) params.emplace_back("near", near);
      if (!visible_from.empty()) params.emplace_back("visibleFrom", visible_from);
      if (limit) params.emplace_back("limit", std::to_string(*limit));
      if (offset) params.emplace_back("offset", std::to_string(*offset));
      return run_query(store_dir, cid, params, format);
    }
    if (*at) {
      const GeoMediaDocument doc = at_src.load();
      std::cout << geojson_point(position_at(doc, parse_datetime(at_time))).dump() << "\n";
      return kExitOk;
    }
    if (*fov) {
      const GeoMediaDocument doc = fov_src.load();
      if (const auto* photo = std::get_if<STPhoto>(&doc.payload)) {
        std::cout << geojson_polygon(fov_sector_polygon(photo->location, photo->abs_direction(), effective_view(photo->fov))).dump()
                  << "\n";
        return kExitOk;
      }
      const auto* video = std::get_if<MovingVideo>(&doc.payload);
      if (!video) throw Error(ErrorCode::WrongKind, "only photos and videos have a field of view");
      if (at_time.empty()) throw Error(ErrorCode::InvalidArgument, "videos need --at");
      const FovState st = fov_at(*video, parse_datetime(at_time));
      std::cout << geojson_polygon(fov_sector_polygon(st.camera, st.abs_direction, effective_view(st.fov))).dump() << "\n";
      return kExitOk;
    }
    if (*visible) {
      const GeoMediaDocument doc = vis_src.load();
      const auto parts = parse_items_query({{"visibleFrom", point}});
      const auto* video = std::get_if<MovingVideo>(&doc.payload);
      if (!video) throw Error(ErrorCode::WrongKind, "visible needs a MovingVideo");
      for (const auto& iv : visible_intervals(*video, *parts.visible_from, step)) {
        std::cout << epoch_to_iso(iv.start) << "/" << epoch_to_iso(iv.end) << "\n";
      }
      return kExitOk;
    }
    if (*convert) {
      const GeoMediaDocument doc = parse_document(read_text(convert_file));
      std::cout << to_json(doc, to == "iso" ? TimeStyle::Iso : TimeStyle::Epoch).dump(2) << "\n";
      return kExitOk;
    }
    if (*serve) return run_serve(store_dir, addr, serve_init);
  } catch (const Error& e) {
    report("", e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
