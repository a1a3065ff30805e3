#include "longwatch/areas.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

std::string normalize_key(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

constexpr double kEdgeEps = 1e-12;

bool on_segment(GeoPoint p, GeoPoint a, GeoPoint b) {
    double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    double scale = std::max(std::fabs(b.lon - a.lon) + std::fabs(b.lat - a.lat), 1.0);
    if (std::fabs(cross) > kEdgeEps * scale) return false;
    return p.lon >= std::min(a.lon, b.lon) - kEdgeEps && p.lon <= std::max(a.lon, b.lon) + kEdgeEps &&
           p.lat >= std::min(a.lat, b.lat) - kEdgeEps && p.lat <= std::max(a.lat, b.lat) + kEdgeEps;
}

Containment locate_in_ring(const std::vector<GeoPoint>& ring, GeoPoint p) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const GeoPoint a = ring[i], b = ring[j];
        if (on_segment(p, a, b)) return Containment::Boundary;
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            double lon_at = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
            if (p.lon < lon_at) inside = !inside;
        }
    }
    return inside ? Containment::Inside : Containment::Outside;
}

double segment_distance(PlanePoint p, PlanePoint a, PlanePoint b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return planar_distance(p, {a.x + t * dx, a.y + t * dy});
}

std::vector<GeoPoint> parse_ring(const nlohmann::json& ring) {
    std::vector<GeoPoint> out;
    for (const auto& pos : ring) {
        if (!pos.is_array() || pos.size() < 2) throw DataError("GeoJSON position must be [lon, lat]");
        out.push_back({pos[1].get<double>(), pos[0].get<double>()});
    }
    if (out.size() > 1 && out.front() == out.back()) out.pop_back();
    if (out.size() < 3) throw DataError("GeoJSON ring needs at least 3 distinct positions");
    return out;
}

Polygon parse_polygon(const nlohmann::json& coords) {
    Polygon poly;
    for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring));
    if (poly.rings.empty()) throw DataError("GeoJSON polygon without rings");
    return poly;
}

}  // namespace

std::string_view to_string(Borough b) noexcept {
    switch (b) {
        case Borough::Manhattan: return "Manhattan";
        case Borough::Brooklyn: return "Brooklyn";
        case Borough::Bronx: return "Bronx";
        case Borough::Queens: return "Queens";
        case Borough::StatenIsland: return "Staten Island";
    }
    return "?";
}

std::optional<Borough> parse_borough(std::string_view text) {
    std::string key = normalize_key(text);
    if (key == "manhattan" || key == "newyork" || key == "mn" || key == "1") return Borough::Manhattan;
    if (key == "bronx" || key == "thebronx" || key == "bx" || key == "2") return Borough::Bronx;
    if (key == "brooklyn" || key == "kings" || key == "bk" || key == "3") return Borough::Brooklyn;
    if (key == "queens" || key == "qn" || key == "4") return Borough::Queens;
    if (key == "statenisland" || key == "richmond" || key == "si" || key == "5") return Borough::StatenIsland;
    return std::nullopt;
}

Containment locate_in(const Area& area, GeoPoint p) {
    for (const auto& poly : area.parts) {
        Containment outer = locate_in_ring(poly.rings.front(), p);
        if (outer == Containment::Outside) continue;
        if (outer == Containment::Boundary) return Containment::Boundary;
        bool in_hole = false;
        for (std::size_t h = 1; h < poly.rings.size(); ++h) {
            Containment c = locate_in_ring(poly.rings[h], p);
            if (c == Containment::Boundary) return Containment::Boundary;
            if (c == Containment::Inside) {
                in_hole = true;
                break;
            }
        }
        if (!in_hole) return Containment::Inside;
    }
    return Containment::Outside;
}

AreaSet::AreaSet(std::vector<Area> areas) : areas_(std::move(areas)) {
    std::sort(areas_.begin(), areas_.end(), [](const Area& a, const Area& b) { return a.id < b.id; });
}

AreaSet AreaSet::from_geojson(std::string_view text, const std::string& id_property) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid GeoJSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
        throw DataError("GeoJSON document must be a FeatureCollection");
    }
    std::vector<Area> areas;
    try {
        for (const auto& feature : doc.at("features")) {
            const auto& props = feature.at("properties");
            if (!props.is_object() || !props.contains(id_property)) {
                throw DataError("GeoJSON feature lacks property \"" + id_property + "\"");
            }
            const auto& idv = props.at(id_property);
            Area area;
            area.id = idv.is_string() ? idv.get<std::string>() : idv.dump();
            const auto& geom = feature.at("geometry");
            const std::string type = geom.at("type").get<std::string>();
            if (type == "Polygon") {
                area.parts.push_back(parse_polygon(geom.at("coordinates")));
            } else if (type == "MultiPolygon") {
                for (const auto& poly : geom.at("coordinates")) area.parts.push_back(parse_polygon(poly));
            } else {
                throw DataError("unsupported GeoJSON geometry type " + type);
            }
            areas.push_back(std::move(area));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed GeoJSON feature: ") + e.what());
    }
    return AreaSet(std::move(areas));
}

std::optional<std::string> AreaSet::locate(GeoPoint p) const {
    // areas_ is sorted, so the first hit is the smallest id.
    for (const auto& area : areas_) {
        if (locate_in(area, p) != Containment::Outside) return area.id;
    }
    return std::nullopt;
}

std::optional<std::string> AreaSet::locate_or_nearest(GeoPoint p, const GridConfig& cfg) const {
    if (auto hit = locate(p)) return hit;
    if (areas_.empty()) return std::nullopt;
    // Unbounded projection: boundary files may extend past the default bounding box.
    const BoundingBox world{};
    PlanePoint q = project(p, cfg.origin, world);
    const Area* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& area : areas_) {
        for (const auto& poly : area.parts) {
            for (const auto& ring : poly.rings) {
                for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
                    double d = segment_distance(q, project(ring[j], cfg.origin, world),
                                                project(ring[i], cfg.origin, world));
                    if (d < best_d) {
                        best_d = d;
                        best = &area;
                    }
                }
            }
        }
    }
    return best->id;
}

}  // namespace longwatch
