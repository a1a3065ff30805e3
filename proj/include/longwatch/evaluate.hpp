#ifndef LONGWATCH_EVALUATE_HPP
#define LONGWATCH_EVALUATE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "longwatch/areas.hpp"
#include "longwatch/geo.hpp"
#include "longwatch/ingest.hpp"
#include "longwatch/tagging.hpp"

namespace longwatch {

/// Which verdict field counts as a tag.
enum class ConfirmationMode { LastWindow, AnyWindow };

struct EvaluationConfig {
    GridConfig grid;
    /// A permit needs at least this many frames within visibility_radius_ft to be in scope.
    std::size_t min_coverage_frames = 20;
    ConfirmationMode mode = ConfirmationMode::LastWindow;
};

bool is_tagged(const CellVerdict& v, ConfirmationMode mode) noexcept;

struct PermitRegion {
    PermitRecord permit;
    std::vector<GridCell> cells;
    std::size_t frames_within_radius = 0;
};

struct CoverageSplit {
    std::vector<PermitRegion> in_scope;
    std::vector<PermitRegion> out_of_scope;
};

/// Splits permits by raw camera coverage (un-displaced frame positions).
CoverageSplit coverage_ceiling(const std::vector<FrameRecord>& frames, const std::vector<PermitRecord>& permits,
                               const EvaluationConfig& cfg);

struct MatchResult {
    std::set<std::string> confirmed_permits;  // permit ids with a tagged cell in their region
    std::vector<GridCell> unmatched_cells;    // tagged cells outside every region, sorted
};

MatchResult match_confirmations(const std::vector<CellVerdict>& verdicts, const std::vector<PermitRecord>& permits,
                                const EvaluationConfig& cfg);

struct Cluster {
    std::vector<GridCell> cells;  // sorted
    PlanePoint centroid;          // mean of the cell centres
};

/// 8-connected components of the given cells, ordered by their smallest cell.
std::vector<Cluster> cluster_unpermitted(const std::vector<GridCell>& cells, const GridConfig& cfg);

struct ReportCounts {
    std::size_t tagged_total = 0;
    std::size_t confirmed_permitted = 0;
    std::size_t unpermitted_clusters = 0;
    std::size_t out_of_scope_permits = 0;
    std::size_t missed_permits = 0;

    bool operator==(const ReportCounts&) const = default;
};

struct EvaluationReport {
    ReportCounts counts;
    std::size_t total_permits = 0;
    /// Permits that were tagged despite falling below the coverage ceiling; reported but not
    /// part of tagged_total, which counts in-scope confirmations only.
    std::size_t confirmed_out_of_scope = 0;
    std::map<std::string, ReportCounts> per_borough;
    std::vector<std::string> confirmed_permit_ids;  // in scope, sorted
    std::vector<std::string> missed_permit_ids;     // in scope, sorted
    std::vector<Cluster> clusters;
    std::vector<std::string> cluster_boroughs;  // parallel to clusters

    std::size_t in_scope_permits() const noexcept { return total_permits - counts.out_of_scope_permits; }

    /// Throws InvariantError if the count identities fail overall or for any borough.
    void check_invariants() const;
};

/// Runs coverage, matching, and clustering and assembles the counts. `boroughs` (optional)
/// assigns unpermitted clusters to the containing or nearest borough polygon.
EvaluationReport build_report(const std::vector<CellVerdict>& verdicts, const std::vector<PermitRecord>& permits,
                              const std::vector<FrameRecord>& frames, const EvaluationConfig& cfg,
                              const AreaSet* boroughs = nullptr);

struct ImpactFactor {
    std::string area_id;
    std::int64_t summed_age_days = 0;
    std::size_t permits = 0;
};

inline constexpr const char* kUnassignedArea = "_unassigned";

/// Summed age in days of the permits active on `as_of`, per containing area. Every area is
/// listed; permits outside all areas go to "_unassigned".
std::vector<ImpactFactor> impact_factor(const std::vector<PermitRecord>& permits, const AreaSet& areas,
                                        Date as_of);

}  // namespace longwatch

#endif  // LONGWATCH_EVALUATE_HPP
