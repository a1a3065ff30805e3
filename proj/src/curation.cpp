#include "longwatch/curation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "longwatch/errors.hpp"
#include "longwatch/random.hpp"

namespace longwatch {

void CurationConfig::validate() const {
    if (!(max_distance_m > 0.0) || !std::isfinite(max_distance_m)) throw UsageError("max_distance_m must be > 0");
    if (!(angle_tolerance_deg > 0.0 && angle_tolerance_deg <= 180.0)) {
        throw UsageError("angle_tolerance_deg must be in (0, 180]");
    }
}

BoroughDistribution::BoroughDistribution(std::map<Borough, double> weights) : weights_(std::move(weights)) {
    for (const auto& [b, w] : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("borough weights must be finite and nonnegative");
    }
}

BoroughDistribution BoroughDistribution::of_permits(const std::vector<PermitRecord>& permits) {
    std::map<Borough, double> counts;
    for (Borough b : kAllBoroughs) counts[b] = 0.0;
    for (const auto& p : permits) counts[p.borough] += 1.0;
    return BoroughDistribution(std::move(counts));
}

double BoroughDistribution::weight(Borough b) const {
    auto it = weights_.find(b);
    return it == weights_.end() ? 0.0 : it->second;
}

double BoroughDistribution::total() const noexcept {
    double t = 0.0;
    for (const auto& [b, w] : weights_) t += w;
    return t;
}

double BoroughDistribution::normalized(Borough b) const {
    double t = total();
    if (!(t > 0.0)) throw DataError("borough distribution has no positive weight");
    return weight(b) / t;
}

BoroughDistribution reference_permit_distribution() {
    return BoroughDistribution({{Borough::Manhattan, 0.529},
                                {Borough::Brooklyn, 0.220},
                                {Borough::Bronx, 0.150},
                                {Borough::Queens, 0.088},
                                {Borough::StatenIsland, 0.005}});
}

BoroughDistribution reference_dashcam_distribution() {
    return BoroughDistribution({{Borough::Manhattan, 0.538},
                                {Borough::Brooklyn, 0.221},
                                {Borough::Bronx, 0.135},
                                {Borough::Queens, 0.098},
                                {Borough::StatenIsland, 0.011}});
}

std::vector<PermitMatch> near_permit_filter(const std::vector<FrameRecord>& frames,
                                            const std::vector<PermitRecord>& permits,
                                            const CurationConfig& cfg, const GridConfig& grid) {
    cfg.validate();
    const double radius_ft = cfg.max_distance_m * kFeetPerMeter;

    // Bucket permits on a grid whose cell equals the search radius; a 3x3 probe then
    // covers every permit within range.
    struct Indexed {
        PlanePoint at;
        const PermitRecord* permit;
    };
    GridConfig buckets = grid;
    buckets.cell_size_ft = radius_ft;
    std::unordered_map<GridCell, std::vector<Indexed>> index;
    for (const auto& p : permits) {
        PlanePoint at = project(p.location, grid);
        index[cell_of(at, buckets)].push_back({at, &p});
    }

    std::vector<PermitMatch> out;
    for (const auto& frame : frames) {
        const PlanePoint here = project(frame.location, grid);
        const GridCell home = cell_of(here, buckets);
        const Indexed* best = nullptr;
        double best_d = 0.0, best_gap = 0.0;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = index.find({home.ix + dx, home.iy + dy});
                if (it == index.end()) continue;
                for (const auto& cand : it->second) {
                    double d = planar_distance(here, cand.at);
                    if (d > radius_ft) continue;
                    double gap = 0.0;
                    if (d >= kCoincidentFeet) {
                        gap = angular_diff(frame.heading, bearing_to(here, cand.at));
                        if (gap > cfg.angle_tolerance_deg) continue;
                    }
                    if (!best || d < best_d || (d == best_d && cand.permit->permit_id < best->permit->permit_id)) {
                        best = &cand;
                        best_d = d;
                        best_gap = gap;
                    }
                }
            }
        }
        if (best) out.push_back({frame, *best->permit, best_d / kFeetPerMeter, best_gap});
    }
    return out;
}

std::map<Borough, std::size_t> apportion(const BoroughDistribution& weights, std::size_t total) {
    std::map<Borough, std::size_t> out;
    for (Borough b : kAllBoroughs) out[b] = 0;
    if (total == 0) return out;
    const double sum = weights.total();
    if (!(sum > 0.0)) throw DataError("borough distribution has no positive weight");

    // Remainders are quantized to 1e-9 so that rounding noise cannot break an exact tie,
    // which then goes to the earlier borough.
    struct Share {
        Borough borough;
        std::int64_t remainder;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (Borough b : kAllBoroughs) {
        const long double exact = static_cast<long double>(total) * weights.weight(b) / sum;
        auto whole = static_cast<std::size_t>(std::floor(exact));
        auto rem = static_cast<std::int64_t>(std::llround((exact - static_cast<long double>(whole)) * 1e9L));
        if (rem >= 1'000'000'000) {
            ++whole;
            rem = 0;
        }
        out[b] = whole;
        assigned += whole;
        shares.push_back({b, rem});
    }
    std::stable_sort(shares.begin(), shares.end(),
                     [](const Share& a, const Share& b) { return a.remainder > b.remainder; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++out[shares[i % shares.size()].borough];
    return out;
}

SampleResult stratified_sample(const std::vector<Candidate>& candidates, const BoroughDistribution& target,
                               std::size_t total, std::uint64_t seed) {
    if (total > candidates.size()) {
        throw DataError("requested " + std::to_string(total) + " frames but only " +
                        std::to_string(candidates.size()) + " candidates exist (deficit " +
                        std::to_string(total - candidates.size()) + ")");
    }
    SampleResult result;
    std::map<Borough, std::vector<const Candidate*>> pools;
    for (Borough b : kAllBoroughs) pools[b];
    for (const auto& c : candidates) pools[c.borough].push_back(&c);

    result.quotas = apportion(target, total);
    std::map<Borough, std::size_t> take;
    std::size_t deficit = 0;
    for (Borough b : kAllBoroughs) {
        take[b] = std::min(result.quotas[b], pools[b].size());
        deficit += result.quotas[b] - take[b];
    }
    result.redistributed = deficit;
    while (deficit > 0) {
        // Spread the shortfall over boroughs with spare candidates, in proportion to their
        // target weights (or their spare capacity when those weights are all zero).
        std::map<Borough, double> spare_weights;
        std::map<Borough, double> spare_capacity;
        for (Borough b : kAllBoroughs) {
            std::size_t spare = pools[b].size() - take[b];
            if (spare == 0) continue;
            spare_weights[b] = target.weight(b);
            spare_capacity[b] = static_cast<double>(spare);
        }
        BoroughDistribution shares(spare_weights);
        if (!(shares.total() > 0.0)) shares = BoroughDistribution(spare_capacity);
        auto extra = apportion(shares, deficit);
        std::size_t moved = 0;
        for (Borough b : kAllBoroughs) {
            std::size_t add = std::min(extra[b], pools[b].size() - take[b]);
            take[b] += add;
            moved += add;
        }
        deficit -= moved;
    }

    for (std::size_t k = 0; k < kAllBoroughs.size(); ++k) {
        const Borough b = kAllBoroughs[k];
        auto& pool = pools[b];
        std::sort(pool.begin(), pool.end(), [](const Candidate* x, const Candidate* y) {
            return x->frame.frame_id != y->frame.frame_id ? x->frame.frame_id < y->frame.frame_id
                                                          : chronological(x->frame, y->frame);
        });
        // Partial Fisher-Yates: the first take[b] slots are a uniform sample.
        Rng rng(derive_seed(seed, k));
        const std::size_t n = take[b];
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            result.frames.push_back(pool[i]->frame);
        }
        result.selected[b] = n;
    }
    return result;
}

double kl_divergence(const BoroughDistribution& p, const BoroughDistribution& q) {
    double sum = 0.0;
    for (Borough b : kAllBoroughs) {
        double pi = p.normalized(b);
        if (pi == 0.0) continue;
        double qi = q.normalized(b);
        if (qi == 0.0) {
            throw UndefinedDivergenceError("KL divergence undefined: q(" + std::string(to_string(b)) +
                                           ") = 0 where p > 0");
        }
        sum += pi * std::log(pi / qi);
    }
    return std::max(sum, 0.0);
}

}  // namespace longwatch
