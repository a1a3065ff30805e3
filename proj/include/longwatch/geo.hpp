#ifndef LONGWATCH_GEO_HPP
#define LONGWATCH_GEO_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace longwatch {

constexpr double kEarthRadiusMeters = 6'371'008.8;  // IUGG mean radius
constexpr double kFeetPerMeter = 3.280839895;
constexpr double kPlaneLimitFeet = 1'000'000.0;

/// WGS84 position in degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

/// Local tangent-plane position in feet (x east, y north of the projection origin).
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const PlanePoint&) const = default;
};

/// Compass heading, degrees clockwise from true north, always in [0, 360).
class Heading {
public:
    Heading() = default;
    /// Normalizes any finite angle into [0, 360). Throws DataError on NaN/inf.
    explicit Heading(double degrees);

    double degrees() const noexcept { return degrees_; }
    double radians() const noexcept;

    bool operator==(const Heading&) const = default;

private:
    double degrees_ = 0.0;
};

/// Integer index of one square grid cell: covers [ix*s, (ix+1)*s) x [iy*s, (iy+1)*s).
struct GridCell {
    std::int64_t ix = 0;
    std::int64_t iy = 0;

    auto operator<=>(const GridCell&) const = default;
};

struct GridCellHash {
    std::size_t operator()(const GridCell& c) const noexcept {
        auto h = static_cast<std::uint64_t>(c.ix) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(c.iy) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct BoundingBox {
    double min_lat = -90.0;
    double max_lat = 90.0;
    double min_lon = -180.0;
    double max_lon = 180.0;

    bool contains(GeoPoint p) const noexcept {
        return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
    }
};

/// 40.45..40.95 N, 74.30..73.65 W.
BoundingBox nyc_bounds();

/// New York City Hall, the default projection origin.
constexpr GeoPoint kCityHall{40.7128, -74.0060};

/// Spatial parameters shared by tagging, evaluation, and simulation.
struct GridConfig {
    GeoPoint origin = kCityHall;
    BoundingBox bounds = nyc_bounds();
    double cell_size_ft = 80.0;
    double displacement_ft = 60.0;
    double region_size_ft = 320.0;
    double visibility_radius_ft = 120.0;

    /// Throws UsageError unless every size is positive and region is a whole number of cells.
    void validate() const;
};

/// True when lat/lon are finite and within WGS84 ranges.
bool is_valid(GeoPoint p) noexcept;

/// Azimuthal equidistant projection (sphere of radius kEarthRadiusMeters) onto the plane tangent at `origin`.
/// Throws BoundsError when either point lies outside `bounds`.
PlanePoint project(GeoPoint p, GeoPoint origin, const BoundingBox& bounds = nyc_bounds());
PlanePoint project(GeoPoint p, const GridConfig& cfg);

/// Closed-form inverse of project. Throws DataError for non-finite input.
GeoPoint unproject(PlanePoint p, GeoPoint origin);
GeoPoint unproject(PlanePoint p, const GridConfig& cfg);

double planar_distance(PlanePoint a, PlanePoint b) noexcept;

/// Minimum separation below which a bearing is undefined.
constexpr double kCoincidentFeet = 0.01;

/// Planar compass bearing from `from` to `to`. Throws DegenerateBearingError when coincident.
Heading bearing_to(PlanePoint from, PlanePoint to);
Heading bearing_to(GeoPoint from, GeoPoint to, const GridConfig& cfg);

/// Smallest absolute difference on the circle, in [0, 180].
double angular_diff(Heading a, Heading b) noexcept;

/// Moves `d` feet along heading `h`. Throws DataError for negative or non-finite d.
PlanePoint displace_along_heading(PlanePoint p, Heading h, double d);

GridCell cell_of(PlanePoint p, const GridConfig& cfg);

/// Lower-left corner of a cell in plane coordinates.
PlanePoint cell_origin(GridCell c, const GridConfig& cfg) noexcept;
PlanePoint cell_center(GridCell c, const GridConfig& cfg) noexcept;

/// Cells whose area overlaps the closed square of side region_size_ft centred at
/// `center`, sorted by (ix, iy).
std::vector<GridCell> cells_in_region(PlanePoint center, const GridConfig& cfg);

}  // namespace longwatch

template <>
struct std::hash<longwatch::GridCell> : longwatch::GridCellHash {};

#endif  // LONGWATCH_GEO_HPP
