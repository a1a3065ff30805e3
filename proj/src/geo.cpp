#include "longwatch/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kFeetPerRadian = kEarthRadiusMeters * kFeetPerMeter;

std::string describe(GeoPoint p) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << p.lat << ", " << p.lon << ")";
    return os.str();
}

void require_in_bounds(GeoPoint p, const BoundingBox& bounds, const char* role) {
    if (!is_valid(p) || !bounds.contains(p)) {
        throw BoundsError(std::string(role) + " coordinate " + describe(p) +
                          " is outside the projection bounding box");
    }
}

}  // namespace

Heading::Heading(double degrees) {
    if (!std::isfinite(degrees)) throw DataError("heading must be finite");
    double d = std::fmod(degrees, 360.0);
    if (d < 0.0) d += 360.0;
    if (d >= 360.0) d = 0.0;  // fmod of tiny negatives can round up to 360
    degrees_ = d;
}

double Heading::radians() const noexcept { return degrees_ * kDegToRad; }

BoundingBox nyc_bounds() { return BoundingBox{40.45, 40.95, -74.30, -73.65}; }

void GridConfig::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(cell_size_ft) || !positive(displacement_ft) || !positive(region_size_ft) ||
        !positive(visibility_radius_ft)) {
        throw UsageError("grid sizes must be strictly positive");
    }
    double ratio = region_size_ft / cell_size_ft;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9) {
        throw UsageError("region_size_ft must be an integer multiple of cell_size_ft");
    }
    if (!is_valid(origin) || !bounds.contains(origin)) {
        throw UsageError("grid origin " + describe(origin) + " is outside the bounding box");
    }
}

bool is_valid(GeoPoint p) noexcept {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

// Spherical azimuthal equidistant plane tangent at `origin`: distance and azimuth from the
// origin are exact, scale error elsewhere is about (rho/R)^2 / 6.
PlanePoint project(GeoPoint p, GeoPoint origin, const BoundingBox& bounds) {
    require_in_bounds(origin, bounds, "origin");
    require_in_bounds(p, bounds, "input");
    const double phi0 = origin.lat * kDegToRad, phi = p.lat * kDegToRad;
    const double dlam = (p.lon - origin.lon) * kDegToRad;
    const double sin_half_dphi = std::sin((phi - phi0) / 2.0), sin_half_dlam = std::sin(dlam / 2.0);
    const double hav = sin_half_dphi * sin_half_dphi + std::cos(phi0) * std::cos(phi) * sin_half_dlam * sin_half_dlam;
    const double c = 2.0 * std::asin(std::min(1.0, std::sqrt(hav)));
    const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
    const double x = kFeetPerRadian * k * std::cos(phi) * std::sin(dlam);
    const double y = kFeetPerRadian * k * (std::cos(phi0) * std::sin(phi) - std::sin(phi0) * std::cos(phi) * std::cos(dlam));
    return {x, y};
}

PlanePoint project(GeoPoint p, const GridConfig& cfg) { return project(p, cfg.origin, cfg.bounds); }

GeoPoint unproject(PlanePoint p, GeoPoint origin) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("plane point must be finite");
    const double rho = std::hypot(p.x, p.y);
    if (rho == 0.0) return origin;
    const double c = rho / kFeetPerRadian;
    const double phi0 = origin.lat * kDegToRad;
    const double phi = std::asin(std::clamp(std::cos(c) * std::sin(phi0) + p.y * std::sin(c) * std::cos(phi0) / rho, -1.0, 1.0));
    const double dlam =
        std::atan2(p.x * std::sin(c), rho * std::cos(phi0) * std::cos(c) - p.y * std::sin(phi0) * std::sin(c));
    return {phi / kDegToRad, origin.lon + dlam / kDegToRad};
}

GeoPoint unproject(PlanePoint p, const GridConfig& cfg) { return unproject(p, cfg.origin); }

double planar_distance(PlanePoint a, PlanePoint b) noexcept { return std::hypot(b.x - a.x, b.y - a.y); }

Heading bearing_to(PlanePoint from, PlanePoint to) {
    double dx = to.x - from.x;
    double dy = to.y - from.y;
    if (std::hypot(dx, dy) <= kCoincidentFeet) {
        throw DegenerateBearingError("bearing undefined between coincident points");
    }
    return Heading(std::atan2(dx, dy) / kDegToRad);
}

Heading bearing_to(GeoPoint from, GeoPoint to, const GridConfig& cfg) {
    return bearing_to(project(from, cfg), project(to, cfg));
}

double angular_diff(Heading a, Heading b) noexcept {
    double d = std::fabs(a.degrees() - b.degrees());
    return d > 180.0 ? 360.0 - d : d;
}

PlanePoint displace_along_heading(PlanePoint p, Heading h, double d) {
    if (!std::isfinite(d) || d < 0.0) throw DataError("displacement distance must be >= 0");
    double rad = h.radians();
    return {p.x + d * std::sin(rad), p.y + d * std::cos(rad)};
}

GridCell cell_of(PlanePoint p, const GridConfig& cfg) {
    return {static_cast<std::int64_t>(std::floor(p.x / cfg.cell_size_ft)),
            static_cast<std::int64_t>(std::floor(p.y / cfg.cell_size_ft))};
}

PlanePoint cell_origin(GridCell c, const GridConfig& cfg) noexcept {
    return {static_cast<double>(c.ix) * cfg.cell_size_ft, static_cast<double>(c.iy) * cfg.cell_size_ft};
}

PlanePoint cell_center(GridCell c, const GridConfig& cfg) noexcept {
    PlanePoint o = cell_origin(c, cfg);
    return {o.x + cfg.cell_size_ft / 2.0, o.y + cfg.cell_size_ft / 2.0};
}

std::vector<GridCell> cells_in_region(PlanePoint center, const GridConfig& cfg) {
    const double s = cfg.cell_size_ft;
    const double half = cfg.region_size_ft / 2.0;
    // A half-open cell overlaps [lo, hi] with positive area iff ix*s < hi and (ix+1)*s > lo.
    auto first = [s](double lo) { return static_cast<std::int64_t>(std::floor(lo / s)); };
    auto last = [s](double hi) { return static_cast<std::int64_t>(std::ceil(hi / s)) - 1; };
    const std::int64_t x0 = first(center.x - half), x1 = last(center.x + half);
    const std::int64_t y0 = first(center.y - half), y1 = last(center.y + half);

    std::vector<GridCell> cells;
    if (x1 >= x0 && y1 >= y0) cells.reserve(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1)));
    for (std::int64_t ix = x0; ix <= x1; ++ix) {
        for (std::int64_t iy = y0; iy <= y1; ++iy) cells.push_back({ix, iy});
    }
    return cells;
}

}  // namespace longwatch
