#include <doctest.h>

#include "longwatch/amplify.hpp"
#include "longwatch/errors.hpp"
#include "longwatch/random.hpp"
#include "oracles.hpp"

using namespace longwatch;

TEST_CASE("binomial coefficients") {
    CHECK(binomial_coefficient(20, 0) == 1);
    CHECK(binomial_coefficient(20, 6) == 38760);
    CHECK(binomial_coefficient(64, 32) == 1832624140942590534ULL);
    CHECK(binomial_coefficient(5, 7) == 0);
    CHECK_THROWS_AS(binomial_coefficient(65, 1), UsageError);
}

TEST_CASE("upper tail edge cases") {
    CHECK(binomial_upper_tail(0.3, 20, 0) == 1.0);
    CHECK(binomial_upper_tail(0.3, 20, 21) == 0.0);
    CHECK(binomial_upper_tail(1.0, 20, 20) == 1.0);
    CHECK(binomial_upper_tail(0.0, 20, 1) == 0.0);
    CHECK_THROWS_AS(binomial_upper_tail(1.5, 20, 1), UsageError);
}

TEST_CASE("upper tail matches the dynamic-programming oracle") {
    Rng rng(derive_seed(21, 0));
    for (int i = 0; i < 400; ++i) {
        double x = rng.uniform();
        std::size_t n = 1 + rng.below(64);
        std::size_t k = rng.below(n + 1);
        CHECK(binomial_upper_tail(x, n, k) == doctest::Approx(oracle::binomial_tail(x, n, k)).epsilon(1e-12));
    }
}

TEST_CASE("binomial mass sums to one") {
    Rng rng(derive_seed(22, 0));
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform();
        std::size_t n = 1 + rng.below(64);
        long double s = 0;
        for (std::size_t j = 0; j <= n; ++j) s += binomial_upper_tail(x, n, j) - binomial_upper_tail(x, n, j + 1);
        CHECK(std::abs(static_cast<double>(s) - 1.0) < 1e-12);
    }
}

TEST_CASE("reference detector values, window 20") {
    // Frozen from a 30-digit evaluation of the binomial sums.
    const BaseMetrics base;
    struct Row {
        std::size_t th;
        double recall, precision;
    };
    for (Row row : {Row{5, 0.999095881952227, 0.991004685143792}, Row{6, 0.995941306112257, 0.998444853393979},
                    Row{7, 0.985588986230394, 0.999782711925407}}) {
        CHECK(amplified_recall(base, 20, row.th) == doctest::Approx(row.recall).epsilon(1e-12));
        CHECK(amplified_precision(base, 20, row.th) == doctest::Approx(row.precision).epsilon(1e-12));
    }
}

TEST_CASE("threshold selection") {
    AmplifiedMetrics m = select_threshold(BaseMetrics{}, 20);
    CHECK(m.threshold == 6);
    CHECK(m.window == 20);
    CHECK(m.f1() == doctest::Approx(0.997191508405222).epsilon(1e-12));

    CHECK(select_threshold(BaseMetrics{1.0, 1.0}, 20).threshold == 20);
    // Brute-force harmonic mean over all 20 thresholds picks 18.
    CHECK(select_threshold(BaseMetrics{0.99, 0.5}, 20).threshold == 18);
}

TEST_CASE("selection agrees with a brute-force scan using the oracle tails") {
    Rng rng(derive_seed(23, 0));
    for (int i = 0; i < 200; ++i) {
        BaseMetrics b{rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
        std::size_t n = 1 + rng.below(40);
        double best = -1;
        for (std::size_t th = 1; th <= n; ++th) {
            double r = oracle::binomial_tail(b.recall, n, th);
            double p = 1.0 - oracle::binomial_tail(1.0 - b.precision, n, th);
            best = std::max(best, r + p > 0 ? 2 * r * p / (r + p) : 0.0);
        }
        auto got = select_threshold(b, n);
        double r = oracle::binomial_tail(b.recall, n, got.threshold);
        double p = 1.0 - oracle::binomial_tail(1.0 - b.precision, n, got.threshold);
        CHECK(2 * r * p / (r + p) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("monotonicity of amplified metrics") {
    Rng rng(derive_seed(24, 0));
    for (int i = 0; i < 500; ++i) {
        std::size_t n = 1 + rng.below(64);
        std::size_t th = 1 + rng.below(n);
        double r1 = rng.uniform(0.01, 1.0), r2 = rng.uniform(0.01, 1.0);
        double p1 = rng.uniform(0.01, 1.0), p2 = rng.uniform(0.01, 1.0);
        if (r1 > r2) std::swap(r1, r2);
        if (p1 > p2) std::swap(p1, p2);
        CHECK(amplified_recall({r1, 0.5}, n, th) <= amplified_recall({r2, 0.5}, n, th) + 1e-15);
        CHECK(amplified_precision({0.5, p1}, n, th) <= amplified_precision({0.5, p2}, n, th) + 1e-15);
    }
    for (double r : {0.1, 0.5676, 0.9}) {
        for (double p : {0.2, 0.9329, 0.99}) {
            for (std::size_t n : {1u, 5u, 20u, 64u}) {
                auto curve = pr_curve({r, p}, n);
                REQUIRE(curve.size() == n);
                for (std::size_t i = 1; i < n; ++i) {
                    CHECK(curve[i].threshold == i + 1);
                    CHECK(curve[i].recall <= curve[i - 1].recall + 1e-15);
                    CHECK(curve[i].precision >= curve[i - 1].precision - 1e-15);
                }
            }
        }
    }
}

TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(amplified_recall(BaseMetrics{}, 20, 0), UsageError);
    CHECK_THROWS_AS(amplified_recall(BaseMetrics{}, 20, 21), UsageError);
    CHECK_THROWS_AS(amplified_precision(BaseMetrics{}, 65, 6), UsageError);
    CHECK_THROWS_AS(BaseMetrics({0.0, 0.5}).validate(), UsageError);
    CHECK_THROWS_AS(BaseMetrics({0.5, 1.1}).validate(), UsageError);
    CHECK_NOTHROW(BaseMetrics({1.0, 1.0}).validate());
}
