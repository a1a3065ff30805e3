#ifndef LONGWATCH_SIMULATE_HPP
#define LONGWATCH_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longwatch/evaluate.hpp"
#include "longwatch/geo.hpp"
#include "longwatch/ingest.hpp"
#include "longwatch/tagging.hpp"

namespace longwatch {

/// Axis-aligned rectangle in plane feet.
struct PlaneRect {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    bool contains(PlanePoint p) const noexcept {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

/// Square centred on the projection origin, large enough for `sheds` at the default spacing.
PlaneRect default_world_bounds(std::size_t sheds);

struct Shed {
    PlanePoint location;  // always a cell centre
    bool permitted = false;
    std::optional<std::string> permit_id;
    Borough borough = Borough::Manhattan;
};

struct SyntheticWorld {
    PlaneRect bounds;
    std::vector<Shed> sheds;  // permitted sheds first
    std::uint64_t seed = 0;
};

/// Places sheds at random cell centres with pairwise separation > 2 * region_size_ft.
/// Throws DataError when the bounds cannot fit them.
SyntheticWorld gen_world(std::size_t n_permitted, std::size_t n_unpermitted, const PlaneRect& bounds,
                         std::uint64_t seed, const GridConfig& grid = {});

/// Permit records for the permitted sheds, valid over [issued_on, expires_on].
std::vector<PermitRecord> world_permits(const SyntheticWorld& world, const GridConfig& grid, Date issued_on,
                                        Date expires_on);

struct DetectorModel {
    double recall = 0.5676;
    double false_positive_rate = 0.0;
    double visibility_ft = 120.0;

    void validate() const;  // throws UsageError
};

struct FrameGenParams {
    std::size_t passes_per_shed = 20;
    std::size_t background_frames = 0;
    Timestamp start{1'698'796'800'000};  // 2023-11-01T00:00:00Z
    std::int64_t duration_ms = 30LL * 86'400'000;
    std::uint64_t seed = 0;
};

/// Frames looking at each shed plus background frames away from every shed. Each shed's
/// passes stand between (displacement - cell/4) and (displacement + cell/4) feet from it,
/// facing it within +-15 degrees, so every observation point falls in the shed's cell.
std::vector<FrameRecord> gen_frames(const SyntheticWorld& world, const DetectorModel& detector,
                                    const FrameGenParams& params, const GridConfig& grid = {});

std::string frames_to_jsonl(const std::vector<FrameRecord>& frames);

/// Fraction of `draws` windows of Bernoulli(success_rate) trials with >= threshold
/// successes. Draws are generated in fixed-size blocks with derived seeds, so the result
/// does not depend on `workers`.
double monte_carlo_tail(double success_rate, std::size_t window, std::size_t threshold, std::uint64_t draws,
                        std::uint64_t seed, unsigned workers = 1);

struct EndToEndParams {
    std::size_t n_permitted = 500;
    std::size_t n_unpermitted = 0;
    std::size_t passes_per_shed = 20;
    std::size_t background_frames = 0;
    DetectorModel detector;
    TaggingParams tagging;
    GridConfig grid;
    std::uint64_t seed = 1;
    double sigma_limit = 4.0;
    unsigned workers = 1;
};

struct EndToEndReport {
    std::size_t sheds = 0;
    std::size_t confirmed_sheds = 0;  // ground-truth shed cells whose last window confirms
    double empirical = 0.0;
    double analytic = 0.0;
    double std_error = 0.0;
    double delta = 0.0;  // empirical - analytic
    bool recall_ok = false;
    bool identities_ok = false;
    std::size_t planted_unpermitted = 0;
    std::size_t recovered_unpermitted = 0;
    bool unpermitted_ok = false;
    std::size_t frames = 0;
    std::size_t rejected_frames = 0;
    EvaluationReport evaluation;
    std::vector<std::string> failures;

    bool passed() const noexcept { return failures.empty(); }
};

/// gen_world -> gen_frames -> ingest -> tagging -> evaluate, compared against the analytic
/// amplified recall.
EndToEndReport end_to_end_check(const EndToEndParams& params);

}  // namespace longwatch

#endif  // LONGWATCH_SIMULATE_HPP
