#ifndef LONGWATCH_TEST_ORACLES_HPP
#define LONGWATCH_TEST_ORACLES_HPP

// Reference implementations used only by tests. Each one is written independently of the
// library code it checks (different formulas, no shared helpers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEarthRadiusM = 6'371'008.8;
constexpr double kFtPerM = 3.280839895;

// Great-circle distance in feet.
inline double haversine_ft(double lat1, double lon1, double lat2, double lon2) {
    const double d2r = kPi / 180.0;
    const double dlat = (lat2 - lat1) * d2r;
    const double dlon = (lon2 - lon1) * d2r;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * d2r) * std::cos(lat2 * d2r) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a))) * kFtPerM;
}

// Initial great-circle bearing, degrees in [0, 360).
inline double initial_bearing_deg(double lat1, double lon1, double lat2, double lon2) {
    const double d2r = kPi / 180.0;
    const double y = std::sin((lon2 - lon1) * d2r) * std::cos(lat2 * d2r);
    const double x = std::cos(lat1 * d2r) * std::sin(lat2 * d2r) -
                     std::sin(lat1 * d2r) * std::cos(lat2 * d2r) * std::cos((lon2 - lon1) * d2r);
    double b = std::atan2(y, x) / d2r;
    return b < 0 ? b + 360.0 : b;
}

// Compass bearing from math-convention angle: 90 - atan2(dy, dx), wrapped.
inline double planar_bearing_deg(double dx, double dy) {
    double b = 90.0 - std::atan2(dy, dx) * 180.0 / kPi;
    while (b < 0) b += 360.0;
    while (b >= 360.0) b -= 360.0;
    return b;
}

// P(sum >= k) for independent Bernoulli(p_i) trials, by dynamic programming over trials.
inline double poisson_binomial_tail(const std::vector<double>& probs, std::size_t k) {
    std::vector<long double> dist(probs.size() + 1, 0.0L);
    dist[0] = 1.0L;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        const long double p = probs[t];
        for (std::size_t j = t + 1; j > 0; --j) dist[j] = dist[j] * (1 - p) + dist[j - 1] * p;
        dist[0] *= (1 - p);
    }
    long double s = 0;
    for (std::size_t j = k; j < dist.size(); ++j) s += dist[j];
    return static_cast<double>(s);
}

inline double binomial_tail(double p, std::size_t n, std::size_t k) {
    return poisson_binomial_tail(std::vector<double>(n, p), k);
}

// Index of the first observation whose trailing window (length `window`, fully populated)
// holds at least `threshold` positives; -1 if none. Direct recount at every index.
inline long first_confirming_index(const std::vector<bool>& obs, std::size_t window, std::size_t threshold) {
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (i + 1 < window) continue;
        std::size_t c = 0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) c += obs[j] ? 1 : 0;
        if (c >= threshold) return static_cast<long>(i);
    }
    return -1;
}

inline bool last_window_confirms(const std::vector<bool>& obs, std::size_t window, std::size_t threshold) {
    if (obs.size() < window) return false;
    return static_cast<std::size_t>(std::count(obs.end() - static_cast<long>(window), obs.end(), true)) >= threshold;
}

// Hamilton apportionment on integer weights; exact rational remainders, ties to lower index.
inline std::vector<std::uint64_t> largest_remainder(const std::vector<std::uint64_t>& weights, std::uint64_t total) {
    const std::uint64_t sum = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
    std::vector<std::uint64_t> seats(weights.size());
    std::vector<std::uint64_t> rem(weights.size());
    std::uint64_t given = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        seats[i] = weights[i] * total / sum;
        rem[i] = weights[i] * total % sum;
        given += seats[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; given < total; ++i, ++given) ++seats[order[i]];
    return seats;
}

// Probability that some fully populated trailing window of `window` i.i.d. Bernoulli(p)
// observations, among the first n, holds >= threshold positives. Exact DP over the bit
// pattern of the last `window` outcomes; patterns at or above threshold are absorbed.
inline double any_window_probability(double p, std::size_t n, std::size_t window, std::size_t threshold) {
    std::unordered_map<std::uint64_t, long double> mass{{0, 1.0L}};
    const std::uint64_t mask = window >= 64 ? ~0ULL : ((1ULL << window) - 1);
    long double absorbed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::unordered_map<std::uint64_t, long double> next;
        for (const auto& [bits, m] : mass) {
            for (int hit = 0; hit < 2; ++hit) {
                const long double w = m * (hit ? p : 1 - p);
                const std::uint64_t nb = ((bits << 1) | static_cast<std::uint64_t>(hit)) & mask;
                if (i + 1 >= window && static_cast<std::size_t>(__builtin_popcountll(nb)) >= threshold) {
                    absorbed += w;
                } else {
                    next[nb] += w;
                }
            }
        }
        mass.swap(next);
    }
    return static_cast<double>(absorbed);
}

}  // namespace oracle

#endif  // LONGWATCH_TEST_ORACLES_HPP
