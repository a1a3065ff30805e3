#ifndef LONGWATCH_AMPLIFY_HPP
#define LONGWATCH_AMPLIFY_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace longwatch {

/// Per-frame detector quality.
struct BaseMetrics {
    double recall = 0.5676;
    double precision = 0.9329;

    void validate() const;  // both in (0, 1]; throws UsageError
};

/// Expected quality of the rolling-window tagger at one threshold.
struct AmplifiedMetrics {
    std::size_t threshold = 0;
    std::size_t window = 0;
    double recall = 0.0;
    double precision = 0.0;

    /// Harmonic mean of recall and precision (0 when both are 0).
    double f1() const noexcept;
};

constexpr std::size_t kMaxWindow = 64;

/// Exact C(n, k) for n <= 64.
std::uint64_t binomial_coefficient(std::size_t n, std::size_t k);

/// P(X >= k) for X ~ Binomial(n, x), summed in extended precision with exact coefficients.
/// Requires n <= 64 and x in [0, 1]; k > n yields 0 and k == 0 yields 1.
double binomial_upper_tail(double x, std::size_t n, std::size_t k);

/// P(at least `threshold` of `window` independent frames detect an existing object).
double amplified_recall(const BaseMetrics& base, std::size_t window, std::size_t threshold);

/// One minus the chance that `threshold` of `window` frames are false detections, treating
/// 1 - precision as the per-frame error rate.
double amplified_precision(const BaseMetrics& base, std::size_t window, std::size_t threshold);

/// One entry per threshold 1..window.
std::vector<AmplifiedMetrics> pr_curve(const BaseMetrics& base, std::size_t window);

/// Threshold with the highest harmonic mean of amplified recall and precision; ties go to the
/// larger threshold.
AmplifiedMetrics select_threshold(const BaseMetrics& base, std::size_t window);

}  // namespace longwatch

#endif  // LONGWATCH_AMPLIFY_HPP
