#include "longwatch/evaluate.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

std::string borough_key(Borough b) { return std::string(to_string(b)); }

void check_counts(const ReportCounts& c, std::size_t total_permits, const std::string& scope) {
    auto fail = [&](const std::string& what) { throw InvariantError(scope + ": " + what); };
    if (c.tagged_total != c.confirmed_permitted + c.unpermitted_clusters) {
        fail("tagged_total != confirmed_permitted + unpermitted_clusters");
    }
    if (c.out_of_scope_permits > total_permits) fail("more out-of-scope permits than permits");
    const std::size_t in_scope = total_permits - c.out_of_scope_permits;
    if (c.confirmed_permitted > in_scope || c.missed_permits != in_scope - c.confirmed_permitted) {
        fail("missed_permits != in-scope permits - confirmed_permitted");
    }
}

}  // namespace

bool is_tagged(const CellVerdict& v, ConfirmationMode mode) noexcept {
    return mode == ConfirmationMode::LastWindow ? v.last_window_confirmed : v.confirmed;
}

CoverageSplit coverage_ceiling(const std::vector<FrameRecord>& frames, const std::vector<PermitRecord>& permits,
                               const EvaluationConfig& cfg) {
    const double radius = cfg.grid.visibility_radius_ft;
    GridConfig buckets = cfg.grid;
    buckets.cell_size_ft = radius;

    std::vector<PermitRegion> regions;
    std::vector<PlanePoint> at;
    regions.reserve(permits.size());
    std::unordered_map<GridCell, std::vector<std::size_t>> index;
    for (std::size_t i = 0; i < permits.size(); ++i) {
        PlanePoint p = project(permits[i].location, cfg.grid);
        at.push_back(p);
        regions.push_back({permits[i], cells_in_region(p, cfg.grid), 0});
        index[cell_of(p, buckets)].push_back(i);
    }
    for (const auto& f : frames) {
        PlanePoint here = project(f.location, cfg.grid);
        GridCell home = cell_of(here, buckets);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = index.find({home.ix + dx, home.iy + dy});
                if (it == index.end()) continue;
                for (std::size_t i : it->second) {
                    if (planar_distance(here, at[i]) <= radius) ++regions[i].frames_within_radius;
                }
            }
        }
    }
    CoverageSplit split;
    for (auto& r : regions) {
        (r.frames_within_radius < cfg.min_coverage_frames ? split.out_of_scope : split.in_scope).push_back(std::move(r));
    }
    return split;
}

MatchResult match_confirmations(const std::vector<CellVerdict>& verdicts, const std::vector<PermitRecord>& permits,
                                const EvaluationConfig& cfg) {
    std::unordered_map<GridCell, std::vector<std::size_t>> covering;
    for (std::size_t i = 0; i < permits.size(); ++i) {
        for (const GridCell& c : cells_in_region(project(permits[i].location, cfg.grid), cfg.grid)) {
            covering[c].push_back(i);
        }
    }
    MatchResult result;
    for (const auto& v : verdicts) {
        if (!is_tagged(v, cfg.mode)) continue;
        auto it = covering.find(v.cell);
        if (it == covering.end()) {
            result.unmatched_cells.push_back(v.cell);
            continue;
        }
        for (std::size_t i : it->second) result.confirmed_permits.insert(permits[i].permit_id);
    }
    std::sort(result.unmatched_cells.begin(), result.unmatched_cells.end());
    result.unmatched_cells.erase(std::unique(result.unmatched_cells.begin(), result.unmatched_cells.end()),
                                 result.unmatched_cells.end());
    return result;
}

std::vector<Cluster> cluster_unpermitted(const std::vector<GridCell>& cells, const GridConfig& cfg) {
    std::vector<GridCell> sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::unordered_set<GridCell> remaining(sorted.begin(), sorted.end());

    std::vector<Cluster> clusters;
    for (const GridCell& seed : sorted) {
        if (!remaining.erase(seed)) continue;
        Cluster cl;
        std::deque<GridCell> frontier{seed};
        while (!frontier.empty()) {
            GridCell c = frontier.front();
            frontier.pop_front();
            cl.cells.push_back(c);
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                for (std::int64_t dy = -1; dy <= 1; ++dy) {
                    GridCell n{c.ix + dx, c.iy + dy};
                    if (remaining.erase(n)) frontier.push_back(n);
                }
            }
        }
        std::sort(cl.cells.begin(), cl.cells.end());
        double sx = 0, sy = 0;
        for (const auto& c : cl.cells) {
            PlanePoint m = cell_center(c, cfg);
            sx += m.x;
            sy += m.y;
        }
        cl.centroid = {sx / static_cast<double>(cl.cells.size()), sy / static_cast<double>(cl.cells.size())};
        clusters.push_back(std::move(cl));
    }
    return clusters;
}

void EvaluationReport::check_invariants() const {
    check_counts(counts, total_permits, "report");
    ReportCounts sum;
    for (const auto& [name, c] : per_borough) {
        std::size_t borough_permits = c.out_of_scope_permits + c.confirmed_permitted + c.missed_permits;
        check_counts(c, borough_permits, "borough " + name);
        sum.tagged_total += c.tagged_total;
        sum.confirmed_permitted += c.confirmed_permitted;
        sum.unpermitted_clusters += c.unpermitted_clusters;
        sum.out_of_scope_permits += c.out_of_scope_permits;
        sum.missed_permits += c.missed_permits;
    }
    if (!per_borough.empty() && !(sum == counts)) throw InvariantError("per-borough counts do not sum to the totals");
    if (clusters.size() != counts.unpermitted_clusters) throw InvariantError("cluster list size mismatch");
}

EvaluationReport build_report(const std::vector<CellVerdict>& verdicts, const std::vector<PermitRecord>& permits,
                              const std::vector<FrameRecord>& frames, const EvaluationConfig& cfg,
                              const AreaSet* boroughs) {
    cfg.grid.validate();
    EvaluationReport report;
    report.total_permits = permits.size();
    for (Borough b : kAllBoroughs) report.per_borough[borough_key(b)];

    const CoverageSplit split = coverage_ceiling(frames, permits, cfg);
    const MatchResult match = match_confirmations(verdicts, permits, cfg);

    for (const auto& r : split.out_of_scope) {
        ++report.counts.out_of_scope_permits;
        ++report.per_borough[borough_key(r.permit.borough)].out_of_scope_permits;
        if (match.confirmed_permits.count(r.permit.permit_id)) ++report.confirmed_out_of_scope;
    }
    for (const auto& r : split.in_scope) {
        auto& b = report.per_borough[borough_key(r.permit.borough)];
        if (match.confirmed_permits.count(r.permit.permit_id)) {
            ++report.counts.confirmed_permitted;
            ++b.confirmed_permitted;
            report.confirmed_permit_ids.push_back(r.permit.permit_id);
        } else {
            ++report.counts.missed_permits;
            ++b.missed_permits;
            report.missed_permit_ids.push_back(r.permit.permit_id);
        }
    }
    std::sort(report.confirmed_permit_ids.begin(), report.confirmed_permit_ids.end());
    std::sort(report.missed_permit_ids.begin(), report.missed_permit_ids.end());

    report.clusters = cluster_unpermitted(match.unmatched_cells, cfg.grid);
    report.counts.unpermitted_clusters = report.clusters.size();
    for (const auto& cl : report.clusters) {
        std::string key = kUnassignedArea;
        if (boroughs && !boroughs->empty()) {
            auto hit = boroughs->locate_or_nearest(unproject(cl.centroid, cfg.grid), cfg.grid);
            if (hit) {
                auto b = parse_borough(*hit);
                key = b ? borough_key(*b) : *hit;
            }
        }
        report.cluster_boroughs.push_back(key);
        ++report.per_borough[key].unpermitted_clusters;
    }

    report.counts.tagged_total = report.counts.confirmed_permitted + report.counts.unpermitted_clusters;
    for (auto& [name, c] : report.per_borough) c.tagged_total = c.confirmed_permitted + c.unpermitted_clusters;
    report.check_invariants();
    return report;
}

std::vector<ImpactFactor> impact_factor(const std::vector<PermitRecord>& permits, const AreaSet& areas, Date as_of) {
    std::map<std::string, ImpactFactor> by_area;
    for (const auto& a : areas.areas()) by_area[a.id] = {a.id, 0, 0};
    for (const auto& p : filter_active(permits, as_of)) {
        std::string id = areas.locate(p.location).value_or(kUnassignedArea);
        auto& f = by_area[id];
        f.area_id = id;
        f.summed_age_days += std::max<std::int64_t>(0, as_of.days - p.issued_on.days);
        ++f.permits;
    }
    std::vector<ImpactFactor> out;
    out.reserve(by_area.size());
    for (auto& [id, f] : by_area) out.push_back(std::move(f));
    return out;
}

}  // namespace longwatch
