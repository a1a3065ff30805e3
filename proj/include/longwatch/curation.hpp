#ifndef LONGWATCH_CURATION_HPP
#define LONGWATCH_CURATION_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "longwatch/areas.hpp"
#include "longwatch/geo.hpp"
#include "longwatch/ingest.hpp"

namespace longwatch {

struct CurationConfig {
    double max_distance_m = 100.0;
    double angle_tolerance_deg = 45.0;

    void validate() const;  // throws UsageError
};

/// Nonnegative per-borough weights; compared after normalization.
class BoroughDistribution {
public:
    BoroughDistribution() = default;
    explicit BoroughDistribution(std::map<Borough, double> weights);

    /// Counts per borough of the given permits.
    static BoroughDistribution of_permits(const std::vector<PermitRecord>& permits);

    double weight(Borough b) const;
    /// Weight over the total; throws DataError when there is no positive weight.
    double normalized(Borough b) const;
    double total() const noexcept;
    const std::map<Borough, double>& weights() const noexcept { return weights_; }

private:
    std::map<Borough, double> weights_;
};

/// Permit column and dashcam column of the published borough table, rounded to 3 decimals.
BoroughDistribution reference_permit_distribution();
BoroughDistribution reference_dashcam_distribution();

struct PermitMatch {
    FrameRecord frame;
    PermitRecord permit;
    double distance_m = 0.0;
    double bearing_gap_deg = 0.0;
};

/// Pairs each frame with its nearest permit that lies within max_distance_m and inside the
/// camera's angular tolerance. Ties on distance go to the smaller permit_id.
std::vector<PermitMatch> near_permit_filter(const std::vector<FrameRecord>& frames,
                                            const std::vector<PermitRecord>& permits,
                                            const CurationConfig& cfg, const GridConfig& grid = {});

struct Candidate {
    FrameRecord frame;
    Borough borough = Borough::Manhattan;
};

struct SampleResult {
    std::vector<FrameRecord> frames;          // ordered by borough, then draw order
    std::map<Borough, std::size_t> quotas;    // largest-remainder targets before redistribution
    std::map<Borough, std::size_t> selected;  // actual picks
    std::size_t redistributed = 0;            // shortfall moved to other boroughs
};

/// Splits `total` into integer per-borough counts proportional to `weights` (largest
/// remainder; ties to the earlier borough).
std::map<Borough, std::size_t> apportion(const BoroughDistribution& weights, std::size_t total);

/// Seeded borough-stratified sample without replacement.
/// Throws DataError when total exceeds the candidate count.
SampleResult stratified_sample(const std::vector<Candidate>& candidates, const BoroughDistribution& target,
                               std::size_t total, std::uint64_t seed);

/// KL(p || q) in nats over normalized weights. Throws UndefinedDivergenceError when
/// q_i = 0 for some p_i > 0.
double kl_divergence(const BoroughDistribution& p, const BoroughDistribution& q);

}  // namespace longwatch

#endif  // LONGWATCH_CURATION_HPP
