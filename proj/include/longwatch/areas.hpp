#ifndef LONGWATCH_AREAS_HPP
#define LONGWATCH_AREAS_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longwatch/geo.hpp"

namespace longwatch {

enum class Borough { Manhattan, Brooklyn, Bronx, Queens, StatenIsland };

inline constexpr std::array<Borough, 5> kAllBoroughs{Borough::Manhattan, Borough::Brooklyn, Borough::Bronx,
                                                     Borough::Queens, Borough::StatenIsland};

std::string_view to_string(Borough b) noexcept;

/// Case-insensitive; accepts DOB spellings ("MANHATTAN", "STATEN ISLAND", "The Bronx") and
/// the one-digit borough codes 1..5.
std::optional<Borough> parse_borough(std::string_view text);

/// A polygon as an outer ring followed by zero or more holes, in lon/lat.
struct Polygon {
    std::vector<std::vector<GeoPoint>> rings;
};

/// A named region made of one or more polygons (GeoJSON Polygon or MultiPolygon).
struct Area {
    std::string id;
    std::vector<Polygon> parts;
};

enum class Containment { Outside, Inside, Boundary };

Containment locate_in(const Area& area, GeoPoint p);

/// Point-in-polygon lookup over a set of non-overlapping areas.
class AreaSet {
public:
    AreaSet() = default;
    explicit AreaSet(std::vector<Area> areas);

    /// Parses a GeoJSON FeatureCollection; each feature's `id_property` becomes the area id.
    /// Throws DataError on malformed documents or features without the property.
    static AreaSet from_geojson(std::string_view text, const std::string& id_property);

    const std::vector<Area>& areas() const noexcept { return areas_; }
    bool empty() const noexcept { return areas_.empty(); }

    /// The containing area; a point on a shared boundary resolves to the lexicographically
    /// smallest id. nullopt when the point lies outside every area.
    std::optional<std::string> locate(GeoPoint p) const;

    /// Like locate, but falls back to the area with the nearest edge (planar distance in
    /// `cfg`'s projection). nullopt only when the set is empty.
    std::optional<std::string> locate_or_nearest(GeoPoint p, const GridConfig& cfg) const;

private:
    std::vector<Area> areas_;  // sorted by id
};

}  // namespace longwatch

#endif  // LONGWATCH_AREAS_HPP
