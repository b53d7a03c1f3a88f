#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "geocms/codec.hpp"
#include "geocms/fov.hpp"
#include "geocms/query.hpp"
#include "geocms/store.hpp"

namespace py = pybind11;
using namespace geocms;

namespace {

using PyPoint = std::tuple<double, double, std::optional<double>>;

PyPoint to_tuple(const GeoPoint& p) { return {p.lon, p.lat, p.alt}; }

TimeStyle style_from(const std::string& s) {
  if (s == "iso") return TimeStyle::Iso;
  if (s == "epoch") return TimeStyle::Epoch;
  throw Error(ErrorCode::InvalidArgument, "time style must be 'iso' or 'epoch'");
}

const MovingVideo& video_of(const GeoMediaDocument& doc) {
  const auto* v = std::get_if<MovingVideo>(&doc.payload);
  if (!v) throw Error(ErrorCode::WrongKind, "expected a MovingVideo document");
  return *v;
}

const MovingPoint& track_of(const GeoMediaDocument& doc) {
  const auto* mp = std::get_if<MovingPoint>(&doc.payload);
  if (!mp) throw Error(ErrorCode::WrongKind, "expected a MovingPoint document");
  return *mp;
}

py::dict collection_dict(const Collection& c) {
  py::dict d;
  d["id"] = c.id;
  d["title"] = c.title;
  d["mediaType"] = std::string(to_string(c.media_type));
  d["created"] = epoch_to_iso(c.created);
  return d;
}

}  // namespace

PYBIND11_MODULE(_geocms, m) {
  m.doc() = "Native core of the geocms package";

  static py::exception<Error> error_type(m, "GeocmsError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("path") = e.path();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("parse_datetime", [](const std::string& s) { return parse_datetime(s).millis; },
        "ISO 8601 text to epoch milliseconds.");
  m.def("format_datetime", [](std::int64_t ms) { return epoch_to_iso(TimeStamp{ms}); },
        "Epoch milliseconds to ISO 8601 UTC text.");

  m.def("media_type", [](const std::string& text) { return std::string(to_string(parse_document(text).kind())); },
        py::arg("document"));
  m.def("normalize",
        [](const std::string& text, const std::string& style) {
          return serialize_document(parse_document(text), style_from(style));
        },
        py::arg("document"), py::arg("time") = "epoch", "Validate a document and reserialize it.");
  m.def("position_at",
        [](const std::string& text, const std::string& at) {
          return to_tuple(position_at(parse_document(text), parse_datetime(at)));
        },
        py::arg("document"), py::arg("at"));
  m.def("fov_polygon",
        [](const std::string& text, std::optional<std::string> at) {
          const GeoMediaDocument doc = parse_document(text);
          if (const auto* photo = std::get_if<STPhoto>(&doc.payload)) {
            return geojson_polygon(fov_sector_polygon(photo->location, photo->abs_direction(), effective_view(photo->fov)))
                .dump();
          }
          if (!at) throw Error(ErrorCode::InvalidArgument, "videos need a time");
          const FovState st = fov_at(video_of(doc), parse_datetime(*at));
          return geojson_polygon(fov_sector_polygon(st.camera, st.abs_direction, effective_view(st.fov))).dump();
        },
        py::arg("document"), py::arg("at") = py::none(), "GeoJSON Polygon text of the view sector.");
  m.def("visible_intervals",
        [](const std::string& text, double lon, double lat, std::int64_t step_ms) {
          std::vector<std::pair<std::int64_t, std::int64_t>> out;
          for (const auto& iv : visible_intervals(video_of(parse_document(text)), GeoPoint{lon, lat, std::nullopt}, step_ms)) {
            out.emplace_back(iv.start.millis, iv.end.millis);
          }
          return out;
        },
        py::arg("document"), py::arg("lon"), py::arg("lat"), py::arg("step_ms") = kDefaultSampleStepMs,
        "Closed [start, end] millisecond intervals in which the point is in view.");
  m.def("trajectory_similarity",
        [](const std::string& a, const std::string& b) {
          return trajectory_similarity(track_of(parse_document(a)), track_of(parse_document(b)));
        },
        py::arg("a"), py::arg("b"), "Mean distance in meters over the shared time span.");

  py::class_<MediaStore>(m, "Store")
      .def(py::init<>())
      .def_static("init", &MediaStore::init, py::arg("dir"))
      .def("open", &MediaStore::open, py::arg("dir"), py::call_guard<py::gil_scoped_release>())
      .def("load", &MediaStore::load, py::arg("dir"), py::call_guard<py::gil_scoped_release>())
      .def("flush", [](const MediaStore& s, const std::filesystem::path& dir) { s.flush(dir); }, py::arg("dir"),
           py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("bound_dir", &MediaStore::bound_dir)
      .def("create_collection",
           [](MediaStore& s, const std::string& id, const std::string& title, const std::string& media_type) {
             return collection_dict(s.create_collection(id, title, media_kind_from_string(media_type)));
           },
           py::arg("id"), py::arg("title"), py::arg("media_type"))
      .def("delete_collection", &MediaStore::delete_collection, py::arg("id"))
      .def("collections",
           [](const MediaStore& s) {
             py::list out;
             for (const auto& c : s.list_collections()) out.append(collection_dict(c));
             return out;
           })
      .def("put_feature",
           [](MediaStore& s, const std::string& cid, const std::string& fid, const std::string& text) {
             s.put_feature(cid, fid, parse_document(text));
           },
           py::arg("collection"), py::arg("fid"), py::arg("document"))
      .def("get_feature",
           [](const MediaStore& s, const std::string& cid, const std::string& fid, const std::string& style) {
             return serialize_document(s.get_feature(cid, fid).doc, style_from(style));
           },
           py::arg("collection"), py::arg("fid"), py::arg("time") = "epoch")
      .def("delete_feature", &MediaStore::delete_feature, py::arg("collection"), py::arg("fid"))
      .def("query",
           [](const MediaStore& s, const std::string& cid, std::optional<std::tuple<double, double, double, double>> bbox,
              std::optional<std::pair<std::string, std::string>> interval,
              std::optional<std::tuple<double, double, double>> near, std::optional<std::pair<double, double>> visible_from,
              std::size_t limit, std::size_t offset) {
             QuerySpec q;
             if (bbox) q.bbox = BBox{std::get<0>(*bbox), std::get<1>(*bbox), std::get<2>(*bbox), std::get<3>(*bbox)};
             if (interval) q.interval = TimeInterval{parse_datetime(interval->first), parse_datetime(interval->second)};
             if (near) q.near = NearPoint{{std::get<0>(*near), std::get<1>(*near), std::nullopt}, std::get<2>(*near)};
             if (visible_from) q.visible_from = GeoPoint{visible_from->first, visible_from->second, std::nullopt};
             q.limit = limit;
             q.offset = offset;
             QueryResult res;
             {
               py::gil_scoped_release release;
               res = evaluate(s, cid, q);
             }
             std::vector<std::string> fids;
             for (const auto& r : res.features) fids.push_back(r.fid);
             return std::make_pair(fids, res.number_matched);
           },
           py::arg("collection"), py::arg("bbox") = py::none(), py::arg("interval") = py::none(),
           py::arg("near") = py::none(), py::arg("visible_from") = py::none(), py::arg("limit") = kDefaultLimit,
           py::arg("offset") = 0, "Returns (fids, number_matched).")
      .def("put_annotation",
           [](MediaStore& s, const std::string& cid, const std::string& fid, const std::string& text) {
             return annotation_to_json(s.put_annotation(cid, fid, annotation_from_json(parse_strict_json(text)))).dump();
           },
           py::arg("collection"), py::arg("fid"), py::arg("annotation"))
      .def("annotations",
           [](const MediaStore& s, const std::string& cid, const std::string& fid) {
             std::vector<std::string> out;
             for (const auto& a : s.list_annotations(cid, fid)) out.push_back(annotation_to_json(a).dump());
             return out;
           },
           py::arg("collection"), py::arg("fid"))
      .def("delete_annotation", &MediaStore::delete_annotation, py::arg("collection"), py::arg("fid"), py::arg("aid"));
}
