#include "longwatch/tagging.hpp"

#include <algorithm>
#include <thread>

#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

bool observation_order(const Observation& a, const Observation& b) {
    if (a.captured_at != b.captured_at) return a.captured_at < b.captured_at;
    return a.frame_id < b.frame_id;
}

/// Runs fn(i) for i in [0, n) over contiguous chunks on `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
    if (workers <= 1 || n < 2 * static_cast<std::size_t>(workers)) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([=, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

void TaggingParams::validate() const {
    if (window < 1 || threshold < 1 || threshold > window) {
        throw UsageError("tagging requires 1 <= threshold <= window (got threshold " + std::to_string(threshold) +
                         ", window " + std::to_string(window) + ")");
    }
}

PlanePoint observation_point(const FrameRecord& frame, const GridConfig& cfg) {
    return displace_along_heading(project(frame.location, cfg), frame.heading, cfg.displacement_ft);
}

std::map<GridCell, CellHistory> build_histories(const DetectionDataset& dataset, const GridConfig& cfg) {
    std::map<GridCell, CellHistory> histories;
    for (const auto& frame : dataset.frames) {
        GridCell cell = cell_of(observation_point(frame, cfg), cfg);
        auto& h = histories[cell];
        h.cell = cell;
        h.observations.push_back({frame.captured_at, frame.detected, frame.frame_id});
    }
    // Datasets from ingest are already sorted; this keeps the invariant for hand-built input.
    for (auto& [cell, h] : histories) {
        if (!std::is_sorted(h.observations.begin(), h.observations.end(), observation_order)) {
            std::sort(h.observations.begin(), h.observations.end(), observation_order);
        }
    }
    return histories;
}

CellVerdict confirm_cell(const CellHistory& history, const TaggingParams& params) {
    params.validate();
    const auto& obs = history.observations;
    CellVerdict v;
    v.cell = history.cell;
    v.observation_count = obs.size();
    v.insufficient_coverage = obs.size() < params.window;

    std::size_t in_window = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i].detected) {
            ++v.positive_count;
            ++in_window;
        }
        if (i >= params.window && obs[i - params.window].detected) --in_window;
        if (i + 1 < params.window) continue;
        const bool hit = in_window >= params.threshold;
        if (hit && !v.confirmed) {
            v.confirmed = true;
            v.first_confirmed_at = obs[i].captured_at;
        }
        if (i + 1 == obs.size()) v.last_window_confirmed = hit;
    }
    return v;
}

std::vector<CellVerdict> run_tagging(const DetectionDataset& dataset, const GridConfig& cfg,
                                     const TaggingParams& params, unsigned workers) {
    cfg.validate();
    params.validate();

    const auto& frames = dataset.frames;
    std::vector<GridCell> cells(frames.size());
    parallel_for(frames.size(), workers,
                 [&](std::size_t i) { cells[i] = cell_of(observation_point(frames[i], cfg), cfg); });

    std::map<GridCell, CellHistory> histories;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        auto& h = histories[cells[i]];
        h.cell = cells[i];
        h.observations.push_back({frames[i].captured_at, frames[i].detected, frames[i].frame_id});
    }
    std::vector<const CellHistory*> ordered;
    ordered.reserve(histories.size());
    for (auto& [cell, h] : histories) {
        if (!std::is_sorted(h.observations.begin(), h.observations.end(), observation_order)) {
            std::sort(h.observations.begin(), h.observations.end(), observation_order);
        }
        ordered.push_back(&h);
    }

    std::vector<CellVerdict> verdicts(ordered.size());
    parallel_for(ordered.size(), workers, [&](std::size_t i) { verdicts[i] = confirm_cell(*ordered[i], params); });
    return verdicts;
}

}  // namespace longwatch
