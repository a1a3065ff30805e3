#include "longwatch/amplify.hpp"

#include <array>
#include <cmath>
#include <string>

#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

using Row = std::array<std::uint64_t, kMaxWindow + 1>;

/// Pascal's triangle up to n = 64; C(64, 32) ~ 1.8e18 fits in 64 bits.
const std::array<Row, kMaxWindow + 1>& pascal() {
    static const auto table = [] {
        std::array<Row, kMaxWindow + 1> t{};
        for (std::size_t n = 0; n <= kMaxWindow; ++n) {
            t[n][0] = t[n][n] = 1;
            for (std::size_t k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
        }
        return t;
    }();
    return table;
}

long double int_pow(long double base, std::size_t e) {
    long double r = 1.0L;
    while (e) {
        if (e & 1U) r *= base;
        base *= base;
        e >>= 1U;
    }
    return r;
}

void check_range(std::size_t window, std::size_t threshold) {
    if (window < 1 || window > kMaxWindow || threshold < 1 || threshold > window) {
        throw UsageError("amplification requires 1 <= threshold <= window <= 64 (got threshold " +
                         std::to_string(threshold) + ", window " + std::to_string(window) + ")");
    }
}

}  // namespace

void BaseMetrics::validate() const {
    if (!(recall > 0.0 && recall <= 1.0) || !(precision > 0.0 && precision <= 1.0)) {
        throw UsageError("base recall and precision must be in (0, 1]");
    }
}

double AmplifiedMetrics::f1() const noexcept {
    const double s = recall + precision;
    return s > 0.0 ? 2.0 * recall * precision / s : 0.0;
}

std::uint64_t binomial_coefficient(std::size_t n, std::size_t k) {
    if (n > kMaxWindow) throw UsageError("binomial coefficients are tabulated for n <= 64");
    return k > n ? 0 : pascal()[n][k];
}

double binomial_upper_tail(double x, std::size_t n, std::size_t k) {
    if (n > kMaxWindow) throw UsageError("binomial tail supports n <= 64");
    if (!(x >= 0.0 && x <= 1.0)) throw UsageError("success rate must be in [0, 1]");
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    const long double p = x, q = 1.0L - p;
    long double sum = 0.0L;
    // Far tail first: small terms accumulate before the large ones.
    for (std::size_t j = n + 1; j-- > k;) {
        sum += static_cast<long double>(pascal()[n][j]) * int_pow(p, j) * int_pow(q, n - j);
    }
    if (sum > 1.0L) sum = 1.0L;
    return static_cast<double>(sum);
}

double amplified_recall(const BaseMetrics& base, std::size_t window, std::size_t threshold) {
    base.validate();
    check_range(window, threshold);
    return binomial_upper_tail(base.recall, window, threshold);
}

double amplified_precision(const BaseMetrics& base, std::size_t window, std::size_t threshold) {
    base.validate();
    check_range(window, threshold);
    return 1.0 - binomial_upper_tail(1.0 - base.precision, window, threshold);
}

std::vector<AmplifiedMetrics> pr_curve(const BaseMetrics& base, std::size_t window) {
    check_range(window, 1);
    std::vector<AmplifiedMetrics> curve;
    curve.reserve(window);
    for (std::size_t th = 1; th <= window; ++th) {
        curve.push_back({th, window, amplified_recall(base, window, th), amplified_precision(base, window, th)});
    }
    return curve;
}

AmplifiedMetrics select_threshold(const BaseMetrics& base, std::size_t window) {
    const auto curve = pr_curve(base, window);
    const AmplifiedMetrics* best = &curve.front();
    for (const auto& m : curve) {
        if (m.f1() >= best->f1()) best = &m;
    }
    return *best;
}

}  // namespace longwatch
