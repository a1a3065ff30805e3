#ifndef LONGWATCH_TAGGING_HPP
#define LONGWATCH_TAGGING_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longwatch/geo.hpp"
#include "longwatch/ingest.hpp"
#include "longwatch/time.hpp"

namespace longwatch {

/// A single frame's contribution to one cell.
struct Observation {
    Timestamp captured_at;
    bool detected = false;
    std::string frame_id;
};

/// Chronological detections and absences recorded in one grid cell.
struct CellHistory {
    GridCell cell;
    std::vector<Observation> observations;  // sorted by (captured_at, frame_id)
};

struct TaggingParams {
    std::size_t window = 20;
    std::size_t threshold = 6;

    void validate() const;  // throws UsageError unless 1 <= threshold <= window
};

struct CellVerdict {
    GridCell cell;
    /// Some trailing window of `window` observations held >= threshold positives.
    bool confirmed = false;
    std::optional<Timestamp> first_confirmed_at;
    /// The window ending at the final observation holds >= threshold positives.
    bool last_window_confirmed = false;
    /// Fewer observations than the window length; never confirmed.
    bool insufficient_coverage = false;
    std::size_t observation_count = 0;
    std::size_t positive_count = 0;

    bool operator==(const CellVerdict&) const = default;
};

/// The frame's position pushed displacement_ft along its heading, toward what it sees.
PlanePoint observation_point(const FrameRecord& frame, const GridConfig& cfg);

/// Buckets each frame into the cell of its observation point. Expects the dataset order.
std::map<GridCell, CellHistory> build_histories(const DetectionDataset& dataset, const GridConfig& cfg);

/// Rolling-window confirmation of one cell.
CellVerdict confirm_cell(const CellHistory& history, const TaggingParams& params);

/// Full tagging pass: one verdict per non-empty cell, sorted by cell. Output is identical
/// for every worker count.
std::vector<CellVerdict> run_tagging(const DetectionDataset& dataset, const GridConfig& cfg,
                                     const TaggingParams& params, unsigned workers = 1);

}  // namespace longwatch

#endif  // LONGWATCH_TAGGING_HPP
