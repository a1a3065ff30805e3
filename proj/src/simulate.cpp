#include "longwatch/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "longwatch/amplify.hpp"
#include "longwatch/curation.hpp"
#include "longwatch/errors.hpp"
#include "longwatch/random.hpp"

namespace longwatch {

namespace {

constexpr std::uint64_t kBlockDraws = 1 << 16;
constexpr std::size_t kPlacementAttempts = 2000;
constexpr double kHeadingJitterDeg = 15.0;
constexpr std::uint64_t kBackgroundStream = 0xB6u << 24;

std::string padded(const char* prefix, std::size_t n, int width) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
    return buf;
}

Borough pick_borough(Rng& rng) {
    const auto dist = reference_permit_distribution();
    double u = rng.uniform() * dist.total();
    for (Borough b : kAllBoroughs) {
        u -= dist.weight(b);
        if (u < 0) return b;
    }
    return Borough::Manhattan;
}

}  // namespace

PlaneRect default_world_bounds(std::size_t sheds) {
    const double half = std::max(2000.0, 500.0 * std::sqrt(static_cast<double>(sheds)) + 1000.0);
    return {-half, -half, half, half};
}

SyntheticWorld gen_world(std::size_t n_permitted, std::size_t n_unpermitted, const PlaneRect& bounds,
                         std::uint64_t seed, const GridConfig& grid) {
    grid.validate();
    SyntheticWorld world{bounds, {}, seed};
    const std::size_t n = n_permitted + n_unpermitted;
    if (n == 0) return world;

    const double min_sep = 2.0 * grid.region_size_ft;
    const double s = grid.cell_size_ft;
    const auto ix0 = static_cast<std::int64_t>(std::ceil(bounds.min_x / s - 0.5));
    const auto ix1 = static_cast<std::int64_t>(std::floor(bounds.max_x / s - 0.5));
    const auto iy0 = static_cast<std::int64_t>(std::ceil(bounds.min_y / s - 0.5));
    const auto iy1 = static_cast<std::int64_t>(std::floor(bounds.max_y / s - 0.5));
    if (ix1 < ix0 || iy1 < iy0) throw DataError("world bounds contain no cell centre");

    // Separation check against a hash of placed sheds keyed by min_sep-sized buckets.
    GridConfig buckets = grid;
    buckets.cell_size_ft = min_sep;
    std::unordered_map<GridCell, std::vector<PlanePoint>> placed;
    auto clear_of_others = [&](PlanePoint p) {
        GridCell home = cell_of(p, buckets);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = placed.find({home.ix + dx, home.iy + dy});
                if (it == placed.end()) continue;
                for (const auto& q : it->second) {
                    if (planar_distance(p, q) <= min_sep) return false;
                }
            }
        }
        return true;
    };

    Rng rng(derive_seed(seed, 0));
    const auto span_x = static_cast<std::uint64_t>(ix1 - ix0 + 1);
    const auto span_y = static_cast<std::uint64_t>(iy1 - iy0 + 1);
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = false;
        for (std::size_t attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
            GridCell c{ix0 + static_cast<std::int64_t>(rng.below(span_x)),
                       iy0 + static_cast<std::int64_t>(rng.below(span_y))};
            PlanePoint p = cell_center(c, grid);
            if (!clear_of_others(p)) continue;
            placed[cell_of(p, buckets)].push_back(p);
            Shed shed;
            shed.location = p;
            shed.permitted = i < n_permitted;
            if (shed.permitted) shed.permit_id = padded("SYN", i, 6);
            shed.borough = pick_borough(rng);
            world.sheds.push_back(std::move(shed));
            ok = true;
        }
        if (!ok) {
            throw DataError("world bounds too small: could not place shed " + std::to_string(i + 1) + " of " +
                            std::to_string(n) + " with separation > " + std::to_string(min_sep) + " ft");
        }
    }
    return world;
}

std::vector<PermitRecord> world_permits(const SyntheticWorld& world, const GridConfig& grid, Date issued_on,
                                        Date expires_on) {
    std::vector<PermitRecord> permits;
    for (const auto& shed : world.sheds) {
        if (!shed.permitted) continue;
        permits.push_back({*shed.permit_id, unproject(shed.location, grid), issued_on, expires_on, shed.borough, false});
    }
    return permits;
}

void DetectorModel::validate() const {
    if (!(recall >= 0.0 && recall <= 1.0) || !(false_positive_rate >= 0.0 && false_positive_rate <= 1.0)) {
        throw UsageError("detector rates must be in [0, 1]");
    }
    if (!(visibility_ft > 0.0)) throw UsageError("detector visibility must be > 0");
}

std::vector<FrameRecord> gen_frames(const SyntheticWorld& world, const DetectorModel& detector,
                                    const FrameGenParams& params, const GridConfig& grid) {
    detector.validate();
    grid.validate();
    if (params.duration_ms <= 0) throw UsageError("frame time window must be positive");

    const double d_lo = std::max(0.0, grid.displacement_ft - grid.cell_size_ft / 4.0);
    const double d_hi = std::min(detector.visibility_ft, grid.displacement_ft + grid.cell_size_ft / 4.0);
    if (d_hi < d_lo) throw UsageError("visibility is shorter than the displacement band");

    auto stamp = [&](Rng& rng) {
        return Timestamp{params.start.millis +
                         static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(params.duration_ms)))};
    };
    auto make = [&](Rng& rng, std::string id, PlanePoint at, double heading, bool detected) {
        FrameRecord f;
        f.frame_id = std::move(id);
        f.captured_at = stamp(rng);
        f.location = unproject(at, grid);
        f.heading = Heading(heading);
        f.detected = detected;
        if (detected) f.confidence = rng.uniform(0.9, 1.0);
        return f;
    };

    std::vector<FrameRecord> frames;
    frames.reserve(world.sheds.size() * params.passes_per_shed + params.background_frames);
    for (std::size_t s = 0; s < world.sheds.size(); ++s) {
        Rng rng(derive_seed(params.seed, s));
        const PlanePoint shed = world.sheds[s].location;
        for (std::size_t k = 0; k < params.passes_per_shed; ++k) {
            const Heading toward(rng.uniform(0.0, 360.0));
            const double d = rng.uniform(d_lo, d_hi);
            const PlanePoint at{shed.x - d * std::sin(toward.radians()), shed.y - d * std::cos(toward.radians())};
            const double heading = toward.degrees() + rng.uniform(-kHeadingJitterDeg, kHeadingJitterDeg);
            const bool detected = rng.bernoulli(detector.recall);
            frames.push_back(make(rng, padded("s", s, 6) + "-" + padded("p", k, 4), at, heading, detected));
        }
    }

    if (params.background_frames > 0) {
        // Background frames keep clear of every shed's region and sight line.
        const double clearance = grid.region_size_ft + grid.displacement_ft + detector.visibility_ft;
        Rng rng(derive_seed(params.seed, kBackgroundStream));
        std::size_t made = 0, attempts = 0;
        while (made < params.background_frames) {
            if (++attempts > 1000 * params.background_frames + 1000) {
                throw DataError("world has no room for background frames away from the sheds");
            }
            PlanePoint at{rng.uniform(world.bounds.min_x, world.bounds.max_x),
                          rng.uniform(world.bounds.min_y, world.bounds.max_y)};
            const bool clear = std::all_of(world.sheds.begin(), world.sheds.end(),
                                           [&](const Shed& sh) { return planar_distance(at, sh.location) > clearance; });
            if (!clear) continue;
            const double heading = rng.uniform(0.0, 360.0);
            const bool detected = rng.bernoulli(detector.false_positive_rate);
            frames.push_back(make(rng, padded("bg", made, 8), at, heading, detected));
            ++made;
        }
    }
    std::sort(frames.begin(), frames.end(), chronological);
    return frames;
}

std::string frames_to_jsonl(const std::vector<FrameRecord>& frames) {
    std::string out;
    for (const auto& f : frames) {
        out += frame_to_jsonl(f);
        out.push_back('\n');
    }
    return out;
}

double monte_carlo_tail(double success_rate, std::size_t window, std::size_t threshold, std::uint64_t draws,
                        std::uint64_t seed, unsigned workers) {
    if (draws < 1) throw UsageError("monte_carlo_tail needs at least one draw");
    if (!(success_rate >= 0.0 && success_rate <= 1.0)) throw UsageError("success rate must be in [0, 1]");
    if (window < 1 || threshold > window) throw UsageError("monte_carlo_tail requires threshold <= window");

    const std::uint64_t blocks = (draws + kBlockDraws - 1) / kBlockDraws;
    auto run_block = [&](std::uint64_t b) {
        Rng rng(derive_seed(seed, b));
        const std::uint64_t n = std::min(kBlockDraws, draws - b * kBlockDraws);
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            std::size_t successes = 0;
            for (std::size_t t = 0; t < window; ++t) successes += rng.bernoulli(success_rate) ? 1 : 0;
            if (successes >= threshold) ++hits;
        }
        return hits;
    };

    std::uint64_t hits = 0;
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) hits += run_block(b);
    } else {
        std::atomic<std::uint64_t> total{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                std::uint64_t local = 0;
                for (std::uint64_t b = w; b < blocks; b += workers) local += run_block(b);
                total += local;
            });
        }
        for (auto& t : pool) t.join();
        hits = total.load();
    }
    return static_cast<double>(hits) / static_cast<double>(draws);
}

EndToEndReport end_to_end_check(const EndToEndParams& params) {
    params.tagging.validate();
    params.detector.validate();
    EndToEndReport report;

    const std::size_t n = params.n_permitted + params.n_unpermitted;
    const SyntheticWorld world =
        gen_world(params.n_permitted, params.n_unpermitted, default_world_bounds(n), params.seed, params.grid);

    FrameGenParams fg;
    fg.passes_per_shed = params.passes_per_shed;
    fg.background_frames = params.background_frames;
    fg.seed = derive_seed(params.seed, 1);
    const Date study_start = date_of(fg.start);

    // Round-trip both datasets through their file formats so ingest is exercised.
    std::istringstream permit_csv(
        permits_to_csv(world_permits(world, params.grid, Date{study_start.days - 120}, Date{study_start.days + 365})));
    const PermitLoad permits = parse_permits(permit_csv, {}, params.grid.bounds);
    std::istringstream frame_jsonl(frames_to_jsonl(gen_frames(world, params.detector, fg, params.grid)));
    IngestOptions ingest;
    ingest.bounds = params.grid.bounds;
    const DetectionDataset dataset = parse_frames(frame_jsonl, FrameFormat::Jsonl, ingest);
    report.frames = dataset.frames.size();
    report.rejected_frames = dataset.rejected + permits.rejected;
    if (report.rejected_frames != 0) report.failures.push_back("generated data produced ingest rejects");

    const auto verdicts = run_tagging(dataset, params.grid, params.tagging, params.workers);
    EvaluationConfig eval;
    eval.grid = params.grid;
    eval.min_coverage_frames = params.tagging.window;
    eval.mode = ConfirmationMode::LastWindow;
    try {
        report.evaluation = build_report(verdicts, filter_active(permits.permits, study_start), dataset.frames, eval);
        report.identities_ok = true;
    } catch (const InvariantError& e) {
        report.failures.push_back(std::string("report identity violated: ") + e.what());
    }

    std::map<GridCell, const CellVerdict*> by_cell;
    for (const auto& v : verdicts) by_cell[v.cell] = &v;
    std::size_t confirmed_unpermitted = 0;
    for (const auto& shed : world.sheds) {
        auto it = by_cell.find(cell_of(shed.location, params.grid));
        const bool tagged = it != by_cell.end() && it->second->last_window_confirmed;
        if (!tagged) continue;
        ++report.confirmed_sheds;
        if (!shed.permitted) ++confirmed_unpermitted;
    }
    report.sheds = n;

    if (n > 0) {
        const BaseMetrics base{params.detector.recall > 0 ? params.detector.recall : 1.0, 1.0};
        report.analytic = params.detector.recall > 0
                              ? amplified_recall(base, params.tagging.window, params.tagging.threshold)
                              : 0.0;
        if (params.passes_per_shed != params.tagging.window) {
            // The analytic tail only describes a history of exactly one window.
            report.failures.push_back("recall comparison needs passes_per_shed == window");
        }
        report.empirical = static_cast<double>(report.confirmed_sheds) / static_cast<double>(n);
        report.std_error = std::sqrt(report.analytic * (1.0 - report.analytic) / static_cast<double>(n));
        report.delta = report.empirical - report.analytic;
        report.recall_ok = std::fabs(report.delta) <= params.sigma_limit * report.std_error;
        if (!report.recall_ok) report.failures.push_back("confirmed fraction outside the sigma band");
    } else {
        report.recall_ok = true;
    }

    report.planted_unpermitted = params.n_unpermitted;
    report.recovered_unpermitted = report.evaluation.counts.unpermitted_clusters;
    if (params.detector.false_positive_rate == 0.0) {
        bool ok = report.recovered_unpermitted == confirmed_unpermitted;
        if (params.detector.recall == 1.0) ok = ok && report.recovered_unpermitted == params.n_unpermitted;
        // With no false positives and full coverage every tag must come from a tagged shed.
        if (params.passes_per_shed >= eval.min_coverage_frames) {
            ok = ok && report.evaluation.counts.tagged_total == report.confirmed_sheds;
        }
        report.unpermitted_ok = ok;
        if (!ok) report.failures.push_back("unpermitted clusters do not match the planted sheds");
    } else {
        report.unpermitted_ok = report.recovered_unpermitted >= confirmed_unpermitted;
        if (!report.unpermitted_ok) report.failures.push_back("tagged unpermitted sheds missing from clusters");
    }
    return report;
}

}  // namespace longwatch
