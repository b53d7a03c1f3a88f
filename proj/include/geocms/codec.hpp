#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "geocms/media.hpp"

namespace geocms {

using Json = nlohmann::ordered_json;

enum class TimeStyle { Iso, Epoch };

/// "YYYY-M(M)-D(D)Thh:mm:ss[.fff]Z" to epoch milliseconds. Only the UTC
/// designator is accepted. Throws BadDateTime.
TimeStamp parse_datetime(std::string_view s);

/// Zero-padded "YYYY-MM-DDThh:mm:ss[.sss]Z"; the fraction is omitted on
/// whole seconds.
std::string epoch_to_iso(TimeStamp t);

/// Parses a GeoMedia JSON document. Comments are tolerated; duplicate
/// members and trailing commas are not. Errors carry a JSON pointer to the
/// offending member in Error::path().
GeoMediaDocument parse_document(std::string_view text);
GeoMediaDocument document_from_json(const Json& j);

/// Canonical form: members in listing order, defaults written out, unknown
/// top-level members appended in their original order.
Json to_json(const GeoMediaDocument& doc, TimeStyle style);
std::string serialize_document(const GeoMediaDocument& doc, TimeStyle style);

std::string_view to_string(InterpolationMode mode);
InterpolationMode interpolation_from_string(std::string_view s);

/// Plain GeoJSON helpers.
Json geojson_point(const GeoPoint& p);
Json geojson_polygon(const SectorPolygon& poly);
/// LineString for multi-sample tracks, Point for single positions, null for
/// a MovingDouble without positions.
Json geojson_geometry(const GeoMediaDocument& doc);

/// Parses JSON text with the same strictness as parse_document (no
/// duplicate members, no trailing commas, comments allowed). Throws BadJson.
Json parse_strict_json(std::string_view text);

}  // namespace geocms
