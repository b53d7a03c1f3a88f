// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "geocms/codec.hpp"
#include "geocms/geodesy.hpp"
#include "geocms/query.hpp"
#include "geocms/service.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace geocms;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

// Collects failures for one criterion; the first few are reported.
struct Check {
  int failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first = what;
  }
};

int g_failed = 0;

void report(int n, const std::string& name, const Check& c, const std::string& detail) {
  const bool ok = c.failures == 0;
  if (!ok) ++g_failed;
  std::printf("criterion %d: %s  %s (%s)", n, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) std::printf(" failures=%d first: %s", c.failures, c.first.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

void run(int n, const std::string& name, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string detail;
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  report(n, name, c, detail);
}

bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b))); }

// Every numeric leaf of `src` must appear at the same pointer in `out`.
void compare_numbers(const Json& src, const Json& out, const std::string& ptr, Check& c, int& count) {
  if (src.is_number()) {
    ++count;
    const Json::json_pointer jp(ptr);
    c.expect(out.contains(jp) && out.at(jp).is_number() && rel_close(src.get<double>(), out.at(jp).get<double>(), 1e-12),
             "number at " + ptr);
  } else if (src.is_array()) {
    for (std::size_t i = 0; i < src.size(); ++i) compare_numbers(src[i], out, ptr + "/" + std::to_string(i), c, count);
  } else if (src.is_object()) {
    for (const auto& [k, v] : src.items()) compare_numbers(v, out, ptr + "/" + k, c, count);
  }
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("geocms_accept_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string dump_state(const MediaStore& s) {
  std::string out;
  for (const auto& c : s.list_collections()) {
    out += c.id + "|" + c.title + "|" + std::string(to_string(c.media_type)) + "|" + std::to_string(c.created.millis) + "\n";
    for (const auto& r : s.all_features(c.id)) {
      out += r.fid + " " + serialize_document(r.doc, TimeStyle::Epoch) + "\n";
      for (const auto& a : s.list_annotations(c.id, r.fid)) out += "  " + annotation_to_json(a).dump() + "\n";
    }
  }
  return out;
}

std::string result_text(const QueryResult& r) {
  std::string out = std::to_string(r.number_matched) + "\n";
  for (const auto& f : r.features) out += f.fid + " " + serialize_document(f.doc, TimeStyle::Epoch) + "\n";
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();

  run(1, "listing round trip", [](Check& c) {
    const auto t0 = Clock::now();
    int numbers = 0;
    for (const char* name : {"moving_point.json", "moving_double.json", "stphoto.json", "moving_video.json"}) {
      const std::string text = fixture(name);
      const Json src = Json::parse(text, nullptr, true, true);
      const GeoMediaDocument doc = parse_document(text);
      const TimeStyle style = src.contains("datetimes") ? TimeStyle::Iso : TimeStyle::Epoch;
      const std::string again = serialize_document(doc, style);
      compare_numbers(src, Json::parse(again), "", c, numbers);
      c.expect(parse_document(again) == doc, std::string(name) + " reparse");
      c.expect(parse_document(serialize_document(doc, TimeStyle::Epoch)) == doc, std::string(name) + " epoch form");
      c.expect(parse_document(serialize_document(doc, TimeStyle::Iso)) == doc, std::string(name) + " iso form");
    }
    const double ms = ms_since(t0);
    c.expect(ms < 1000.0, "runtime");
    return std::to_string(numbers) + " numbers, tol 1e-12 rel, " + std::to_string(ms) + " ms < 1000 ms";
  });

  run(2, "time encoding cross-check", [](Check& c) {
    c.expect(parse_datetime("2018-08-01T13:01:01Z").millis == 1533128461000, "iso -> epoch");
    c.expect(epoch_to_iso(TimeStamp{1533128461000}) == "2018-08-01T13:01:01Z", "epoch -> iso");
    // The ISO listing and the epoch listings describe the same instants.
    const auto iso_doc = parse_document(fixture("moving_point.json"));
    const auto epoch_doc = parse_document(fixture("moving_video.json"));
    const auto& a = std::get<MovingPoint>(iso_doc.payload).samples();
    const auto& b = std::get<MovingVideo>(epoch_doc.payload).track().samples();
    c.expect(a.size() == b.size(), "sample counts");
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      c.expect(a[i].t == b[i].t, "listing instant " + std::to_string(i));
      c.expect(a[i].t.millis == 1533128461000 + 1000 * static_cast<std::int64_t>(i), "listing value " + std::to_string(i));
    }
    const Json iso = to_json(epoch_doc, TimeStyle::Iso);
    c.expect(iso["datetimes"] == Json::array({"2018-08-01T13:01:01Z", "2018-08-01T13:01:02Z", "2018-08-01T13:01:03Z"}),
             "epoch listing written as ISO");
    const Json epoch = to_json(iso_doc, TimeStyle::Epoch);
    c.expect(epoch["timeline"] == Json::array({1533128461000, 1533128462000, 1533128463000}), "ISO listing written as epoch");
    return "2018-08-01T13:01:01Z <-> 1533128461000, exact";
  });

  run(3, "interpolation oracle", [](Check& c) {
    synth::Gen g(301);
    int pairs = 0, rejected = 0;
    for (auto mode : {InterpolationMode::Discrete, InterpolationMode::Linear, InterpolationMode::Stepwise}) {
      for (int i = 0; i < 1000; ++i) {
        const int n = static_cast<int>(g.integer(1, 10));
        auto samples = g.walk(n, 80.0);
        const bool alt = g.coin();
        for (auto& s : samples) {
          if (alt) s.position.alt = g.uniform(-100, 3000);
        }
        const MovingPoint mp(samples, mode);
        std::vector<std::int64_t> ts;
        std::vector<double> lon, lat, al;
        for (const auto& s : samples) {
          ts.push_back(s.t.millis);
          lon.push_back(s.position.lon);
          lat.push_back(s.position.lat);
          al.push_back(s.position.alt.value_or(0));
        }
        // Half the queries land on samples so Discrete has values to check.
        const std::int64_t t = g.coin() ? ts[static_cast<std::size_t>(g.integer(0, n - 1))] : g.integer(ts.front(), ts.back());
        const auto want_lon = oracle::eval_series(ts, lon, mode, t);
        ++pairs;
        if (!want_lon) {
          c.expect(code_of([&] { mp.at(TimeStamp{t}); }) == ErrorCode::NotASample, "discrete rejects non-sample");
          ++rejected;
          continue;
        }
        const GeoPoint got = mp.at(TimeStamp{t});
        c.expect(std::fabs(got.lon - *want_lon) <= 1e-9, "lon");
        c.expect(std::fabs(got.lat - *oracle::eval_series(ts, lat, mode, t)) <= 1e-9, "lat");
        if (alt) c.expect(got.alt && std::fabs(*got.alt - *oracle::eval_series(ts, al, mode, t)) <= 1e-9, "alt");

        std::vector<ValueSample> vs;
        for (std::size_t k = 0; k < ts.size(); ++k) vs.push_back({TimeStamp{ts[k]}, al[k]});
        const MovingDouble md(vs, mode, std::nullopt);
        c.expect(std::fabs(md.at(TimeStamp{t}) - *oracle::eval_series(ts, al, mode, t)) <= 1e-9, "scalar series");
      }
    }
    c.expect(rejected > 100, "enough discrete rejections exercised");
    return std::to_string(pairs) + " pairs over 3 modes, tol 1e-9, " + std::to_string(rejected) + " discrete rejections";
  });

  run(4, "FoV containment oracle", [](Check& c) {
    synth::Gen g(401);
    int inside = 0, vertices = 0;
    for (int i = 0; i < 1000; ++i) {
      const GeoPoint cam{g.uniform(-179, 179), g.uniform(-75, 75)};
      FieldOfView fov;
      fov.h_angle = g.uniform(1, 360);
      fov.view_distance = g.uniform(5, 2000);
      fov.direction2d = g.uniform(0, 360);
      const double dir = *fov.direction2d;
      const GeoPoint p = oracle::destination(cam, g.uniform(0, 360), g.uniform(0, 1.5) * fov.view_distance);
      const bool got = fov_contains(cam, dir, fov, p);
      c.expect(got == oracle::in_sector(cam, dir, fov.h_angle, fov.view_distance, p), "containment " + std::to_string(i));
      inside += got;
      const auto poly = fov_sector_polygon(cam, dir, fov);
      for (std::size_t k = 1; k + 1 < poly.ring.size(); ++k) {
        ++vertices;
        const double d = oracle::distance(cam, poly.ring[k]);
        c.expect(std::fabs(d - fov.view_distance) <= 1e-6 * fov.view_distance, "arc vertex distance");
      }
    }
    return "1000 triples exact (" + std::to_string(inside) + " inside), " + std::to_string(vertices) +
           " arc vertices at viewDistance +-1e-6 rel";
  });

  run(5, "fixed-direction convention", [](Check& c) {
    struct Track {
      const char* name;
      GeoPoint a, b;
      double heading;
    };
    const Track tracks[] = {{"eastbound", {0, 0}, {0.01, 0}, 90.0}, {"northbound", {10, 20}, {10, 20.01}, 0.0}};
    const std::pair<double, double> cases[] = {{-360, 0}, {-90, 90}, {-180, 180}, {-270, 270}};
    int checked = 0;
    for (const auto& tr : tracks) {
      c.expect(std::fabs(oracle::angdiff(oracle::bearing(tr.a, tr.b), tr.heading)) < 1e-9, "oracle heading");
      const MovingPoint track({{TimeStamp{0}, tr.a}, {TimeStamp{60'000}, tr.b}}, InterpolationMode::Linear);
      for (auto [code, offset] : cases) {
        FieldOfView fov;
        fov.direction2d = code;
        const MovingVideo v("v.mp4", track, {fov});
        for (std::int64_t t : {0, 15'000, 30'000, 60'000}) {
          const double got = fov_at(v, TimeStamp{t}).abs_direction;
          c.expect(std::fabs(oracle::angdiff(got, std::fmod(tr.heading + offset, 360.0))) < 1e-9,
                   std::string(tr.name) + " " + std::to_string(code));
          ++checked;
        }
      }
    }
    return "-360/-90/-180/-270 -> +0/+90/+180/+270 on eastbound and northbound, " + std::to_string(checked) + " checks";
  });

  run(6, "index equivalence", [](Check& c) {
    synth::Gen g(601);
    MediaStore s;
    double worst = 0.0;
    int queries = 0, with_visible = 0;
    std::size_t features = 0;
    for (auto kind : {MediaKind::MovingPoint, MediaKind::MovingDouble, MediaKind::STPhoto, MediaKind::MovingVideo}) {
      const std::string cid = std::string(to_string(kind));
      s.create_collection(cid, cid, kind);
      for (int i = 0; i < 1000; ++i) s.put_feature(cid, "f" + std::to_string(i), g.of_kind(kind, 0.3));
      const auto all = s.all_features(cid);
      features += all.size();
      const bool viewable = kind == MediaKind::STPhoto || kind == MediaKind::MovingVideo;
      for (int n = 0; n < 50; ++n) {
        QuerySpec q;
        if (g.coin(0.5)) q.bbox = g.bbox(0.3);
        if (g.coin(0.5)) q.interval = g.interval();
        if (g.coin(0.4)) q.near = NearPoint{g.point(0.3), g.uniform(100, 5000)};
        if (viewable && g.coin(0.7)) {
          const auto& pick = all[static_cast<std::size_t>(g.integer(0, 999))];
          const GeoPoint base = pick.bbox ? GeoPoint{pick.bbox->min_lon, pick.bbox->min_lat} : GeoPoint{};
          q.visible_from = destination(base, g.uniform(0, 360), g.uniform(0, 300));
          ++with_visible;
        }
        q.limit = static_cast<std::size_t>(g.integer(1, 1000));
        q.offset = static_cast<std::size_t>(g.integer(0, 20));

        std::vector<std::string> scan;
        for (const auto& r : all) {
          if (matches(r, q)) scan.push_back(r.fid);
        }
        const auto t0 = Clock::now();
        const QueryResult res = evaluate(s, cid, q);
        const double ms = ms_since(t0);
        worst = std::max(worst, ms);
        ++queries;
        std::vector<std::string> got, page;
        for (const auto& r : res.features) got.push_back(r.fid);
        for (std::size_t i = q.offset; i < scan.size() && page.size() < q.limit; ++i) page.push_back(scan[i]);
        c.expect(res.number_matched == scan.size(), cid + " numberMatched");
        c.expect(got == page, cid + " page set and order");
        c.expect(ms < 50.0, cid + " query time " + std::to_string(ms) + " ms");
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu features in 4 collections of 1000, %d queries (%d with visibleFrom), slowest %.2f ms < 50 ms",
                  features, queries, with_visible, worst);
    return std::string(buf);
  });

  run(7, "visibility sampling", [](Check& c) {
    // Eastbound along the equator, 0.01 degrees in 60 s.
    const MovingPoint track({{TimeStamp{0}, {0, 0}}, {TimeStamp{60'000}, {0.01, 0}}}, InterpolationMode::Linear);
    struct Case {
      double direction;
      GeoPoint point;
    };
    const GeoPoint mid{0.005, 0};
    const Case cases[] = {
        {-360, mid},                                   // dead ahead on the track
        {-90, oracle::destination(mid, 180, 20)},      // right of an eastbound camera
        {-270, oracle::destination(mid, 0, 20)},       // left
        {-180, oracle::destination(mid, 180, 5)},      // rear
        {0, oracle::destination(mid, 0, 40)},          // fixed north
    };
    std::int64_t worst = 0;
    int boundaries = 0;
    for (const auto& k : cases) {
      FieldOfView fov;
      fov.direction2d = k.direction;
      const MovingVideo v("v.mp4", track, {fov});
      const auto got = visible_intervals(v, k.point, 100);
      const auto dense = oracle::sweep(v, k.point, oracle::sample_times(v, 1));
      c.expect(!dense.empty(), "point seen at some time");
      c.expect(got.size() == dense.size(), "interval count");
      for (std::size_t i = 0; i < std::min(got.size(), dense.size()); ++i) {
        const std::int64_t ds = std::llabs(got[i].start.millis - dense[i].start.millis);
        const std::int64_t de = std::llabs(got[i].end.millis - dense[i].end.millis);
        worst = std::max({worst, ds, de});
        boundaries += 2;
        c.expect(ds <= 100 && de <= 100, "boundary within one step");
      }
    }
    return std::to_string(boundaries) + " boundaries vs 1 ms sweep, worst " + std::to_string(worst) + " ms <= 100 ms";
  });

  run(8, "durability", [](Check& c) {
    synth::Gen g(801);
    MediaStore s;
    s.create_collection("taxi", "Taxi GPS", MediaKind::MovingPoint, TimeStamp{1});
    s.create_collection("cams", "Cameras", MediaKind::STPhoto, TimeStamp{2});
    s.create_collection("dash", "Dashcams", MediaKind::MovingVideo, TimeStamp{3});
    const char* cids[] = {"taxi", "cams", "dash"};
    const MediaKind kinds[] = {MediaKind::MovingPoint, MediaKind::STPhoto, MediaKind::MovingVideo};
    for (int i = 0; i < 100; ++i) s.put_feature(cids[i % 3], "f" + std::to_string(i), g.of_kind(kinds[i % 3], 0.2));
    for (int i = 0; i < 20; ++i) {
      const std::string fid = "f" + std::to_string(3 * i + 1);
      s.put_annotation("cams", fid, {"", AnnotationKind::Text, "note " + std::to_string(i), {}, std::nullopt});
    }

    std::vector<std::pair<std::string, QuerySpec>> specs;
    for (int n = 0; n < 30; ++n) {
      QuerySpec q;
      if (g.coin(0.6)) q.bbox = g.bbox(0.2);
      if (g.coin(0.5)) q.interval = g.interval();
      if (g.coin(0.3)) q.near = NearPoint{g.point(0.2), g.uniform(500, 20000)};
      const std::string cid = cids[n % 3];
      if (cid != "taxi" && g.coin(0.5)) q.visible_from = g.point(0.2);
      specs.emplace_back(cid, q);
    }
    auto all_results = [&](const MediaStore& m) {
      std::string out;
      for (const auto& [cid, q] : specs) out += result_text(evaluate(m, cid, q));
      return out;
    };

    TempDir dir("durability");
    s.flush(dir.path);
    MediaStore r;
    r.load(dir.path);
    const std::string before = all_results(s);
    c.expect(before == all_results(r), "query results byte-identical after load");
    c.expect(dump_state(r) == dump_state(s), "state identical after load");
    std::size_t anns = 0;
    for (const auto& f : r.all_features("cams")) anns += r.list_annotations("cams", f.fid).size();
    c.expect(anns == 20, "20 annotations");

    // Interrupt a second flush at every step.
    const std::string old_state = dump_state(s);
    s.delete_feature("taxi", "f0");
    s.put_feature("taxi", "extra", g.moving_point(0.2));
    s.put_annotation("dash", "f2", {"", AnnotationKind::Icon, "car", {}, std::nullopt});
    const std::string new_state = dump_state(s);
    std::vector<std::string> steps;
    {
      TempDir probe("probe");
      s.flush(probe.path, [&](std::string_view st) { steps.emplace_back(st); });
    }
    int olds = 0, news = 0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      TempDir work("crash");
      fs::copy(dir.path, work.path);
      std::size_t calls = 0;
      try {
        s.flush(work.path, [&](std::string_view) {
          if (calls++ == k) throw std::runtime_error("simulated crash");
        });
        c.expect(false, "crash not injected at " + steps[k]);
      } catch (const std::runtime_error&) {
      }
      try {
        MediaStore m;
        m.load(work.path);
        const std::string got = dump_state(m);
        c.expect(got == old_state || got == new_state, "state after crash at " + steps[k]);
        olds += got == old_state;
        news += got == new_state;
      } catch (const Error& e) {
        c.expect(false, "load after crash at " + steps[k] + " threw " + std::string(to_string(e.code())));
      }
    }

    // Damage must be reported, never loaded.
    int detected = 0, damages = 0;
    for (const auto& entry : fs::directory_iterator(dir.path)) {
      if (entry.path().extension() != ".ndjson") continue;
      const std::string good = oracle::read_file(entry.path().string());
      for (int variant = 0; variant < 3; ++variant) {
        std::string bad = good;
        if (good.empty()) {
          bad = variant == 0 ? "x" : variant == 1 ? "\n" : R"({"fid":"ghost"})" "\n";
        } else if (variant == 0) {
          bad = good.substr(0, good.size() / 2);
        } else if (variant == 1) {
          bad[good.size() / 3] = bad[good.size() / 3] == '1' ? '2' : '1';
        } else {
          bad += good.substr(0, good.find('\n') + 1);
        }
        std::ofstream(entry.path(), std::ios::binary | std::ios::trunc) << bad;
        ++damages;
        MediaStore m;
        detected += code_of([&] { m.load(dir.path); }) == ErrorCode::CorruptStore;
      }
      std::ofstream(entry.path(), std::ios::binary | std::ios::trunc) << good;
    }
    c.expect(damages > 0 && detected == damages, "damaged files raise CorruptStore");
    return "3 collections, 100 features, 20 annotations; " + std::to_string(specs.size()) + " queries identical; " +
           std::to_string(steps.size()) + " crash points (" + std::to_string(olds) + " old, " + std::to_string(news) +
           " new); " + std::to_string(detected) + "/" + std::to_string(damages) + " damages detected";
  });

  run(9, "HTTP conformance", [&](Check& c) {
    TempDir dir("http");
    MediaStore::init(dir.path);
    MediaStore store;
    store.open(dir.path);
    ApiService api(store);
    HttpServer server(api);
    const int port = server.bind("127.0.0.1", 0);
    std::thread th([&] { server.run(); });
    struct Joiner {
      HttpServer& s;
      std::thread& t;
      ~Joiner() {
        s.stop();
        if (t.joinable()) t.join();
      }
    } joiner{server, th};
    httplib::Client cl("127.0.0.1", port);
    auto status = [](const httplib::Result& r) { return r ? r->status : -1; };

    auto r = cl.Post("/collections", R"({"id":"taxi","title":"Taxi","mediaType":"MovingPoint"})", "application/json");
    c.expect(status(r) == 201, "create collection");
    r = cl.Put("/collections/taxi/items/listing", fixture("moving_point.json"), "application/json");
    c.expect(status(r) == 201, "put listing");

    r = cl.Get("/collections/taxi/items?bbox=140,40,180,70");
    c.expect(status(r) == 200, "bbox query");
    if (status(r) == 200) {
      const Json fc = Json::parse(r->body);
      c.expect(fc["numberMatched"] == 1 && fc["features"].size() == 1, "one match");
      if (fc["features"].size() == 1) {
        const Json& f = fc["features"][0];
        c.expect(f["id"] == "listing", "feature id");
        const GeoMediaDocument doc = document_from_json(f["properties"]["document"]);
        c.expect(doc == parse_document(fixture("moving_point.json")), "document values");
      }
    }
    r = cl.Get("/collections/taxi/items?bbox=0,0,1,1");
    c.expect(status(r) == 200 && Json::parse(r->body)["numberMatched"] == 0, "disjoint bbox");

    r = cl.Get("/collections/taxi/items/listing?time=epoch");
    c.expect(status(r) == 200 && Json::parse(r->body)["timeline"] ==
                                     Json::array({1533128461000, 1533128462000, 1533128463000}),
             "epoch times");
    r = cl.Get("/collections/taxi/items/listing?time=iso");
    c.expect(status(r) == 200 && Json::parse(r->body)["datetimes"][0] == "2018-08-01T13:01:01Z", "iso times");

    r = cl.Get("/collections/taxi/items/listing/position?at=2018-08-01T13:01:02Z");
    c.expect(status(r) == 200, "position");
    if (status(r) == 200) c.expect(Json::parse(r->body)["coordinates"] == Json::array({160.0, 60.0, 12.0}), "position value");
    r = cl.Get("/collections/taxi/items/listing/position?at=2018-08-01T13:01:01.500Z");
    if (status(r) == 200) {
      const Json p = Json::parse(r->body)["coordinates"];
      c.expect(std::fabs(p[0].get<double>() - 155.0) < 1e-9 && std::fabs(p[1].get<double>() - 55.0) < 1e-9 &&
                   std::fabs(p[2].get<double>() - 11.0) < 1e-9,
               "interpolated position");
    } else {
      c.expect(false, "interpolated position status");
    }
    r = cl.Get("/collections/taxi/items/listing/visible?point=160,60");
    c.expect(status(r) == 400, "visible on a track is rejected");

    r = cl.Post("/collections", R"({"id":"dash","title":"Dashcams","mediaType":"MovingVideo"})", "application/json");
    c.expect(status(r) == 201, "create video collection");
    r = cl.Put("/collections/dash/items/video1", fixture("moving_video.json"), "application/json");
    c.expect(status(r) == 201, "put video listing");
    const GeoPoint east = destination({160, 60}, 90, 10);
    r = cl.Get("/collections/dash/items/video1/visible?point=" + std::to_string(east.lon) + "," + std::to_string(east.lat));
    c.expect(status(r) == 200, "visible");
    if (status(r) == 200) {
      const Json v = Json::parse(r->body);
      const GeoMediaDocument listing = parse_document(fixture("moving_video.json"));
      const auto& video = std::get<MovingVideo>(listing.payload);
      const GeoPoint sent{std::stod(std::to_string(east.lon)), std::stod(std::to_string(east.lat))};
      Json want = Json::array();
      for (const auto& iv : visible_intervals(video, sent)) want.push_back(epoch_to_iso(iv.start) + "/" + epoch_to_iso(iv.end));
      c.expect(!want.empty() && v["intervals"] == want, "visible intervals");
    }

    server.stop();
    th.join();
    MediaStore reopened;
    reopened.load(dir.path);
    c.expect(reopened.get_feature("taxi", "listing").doc == parse_document(fixture("moving_point.json")), "persisted");

    const double total = ms_since(suite_start);
    c.expect(total < 30'000.0, "suite runtime");
    char buf[96];
    std::snprintf(buf, sizeof buf, "scripted session on port %d; acceptance suite %.0f ms < 30000 ms", port, total);
    return std::string(buf);
  });

  std::printf("%s\n", g_failed ? "acceptance: FAILED" : "acceptance: all criteria passed");
  return g_failed ? 1 : 0;
}
