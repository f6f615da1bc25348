#include <hubtail/weights.hpp>

#include <hubtail/errors.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

using hubtail::random_stream;
using hubtail::stream_purpose;
using hubtail::unsupported_error;
using hubtail::weight_distribution;

namespace {

// 5-sigma binomial check: empirical count of `hits` in `trials` against
// probability p. Loose enough to never flake under a fixed seed, tight
// enough to catch an inverted or shifted quantile.
void check_fraction(std::uint64_t hits, std::uint64_t trials, double p) {
    const double n = static_cast<double>(trials);
    const double sigma = std::sqrt(std::max(p * (1.0 - p) / n, 1e-12 / n));
    CHECK(std::abs(static_cast<double>(hits) / n - p) <= 5.0 * sigma);
}

} // namespace

TEST_CASE("pareto factory validates parameters and evaluates the tail") {
    CHECK_THROWS_AS(weight_distribution::pareto(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::pareto(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::pareto(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::pareto(2.0, -1.0), std::invalid_argument);

    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK(d.has_tail_index());
    CHECK(d.tail_index() == 2.0);
    CHECK(d.mean() == 2.0);
    CHECK(d.lower_endpoint() == 1.0);
    CHECK(d.tail(0.0) == 1.0);
    CHECK(d.tail(1.0) == 1.0);
    CHECK(d.tail(2.0) == Catch::Approx(0.25));
    CHECK(d.tail(10.0) == Catch::Approx(0.01));
    CHECK_THROWS_AS(d.tail(-0.5), std::invalid_argument);

    const auto d3 = weight_distribution::pareto(3.0, 2.0);
    CHECK(d3.mean() == Catch::Approx(3.0));
    CHECK(d3.tail(4.0) == Catch::Approx(0.125));
}

TEST_CASE("grid factory validates atoms and evaluates exact tails") {
    using vd = std::vector<double>;
    CHECK_THROWS_AS(weight_distribution::grid({1.0, 2.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({-1.0, 2.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({2.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({1.0, 2.0}, {0.7, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::grid({1.0, 2.0}, {0.7, 0.2}), std::invalid_argument);
    // All mass at zero has mean zero, which no graph statistic can normalize.
    CHECK_THROWS_AS(weight_distribution::grid({0.0}, {1.0}), std::invalid_argument);

    const auto d = weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25});
    CHECK_FALSE(d.has_tail_index());
    CHECK_THROWS_AS(d.tail_index(), unsupported_error);
    CHECK(d.mean() == Catch::Approx(1.25));
    CHECK(d.lower_endpoint() == 0.0);
    CHECK(d.grid_values() == vd{0.0, 1.0, 3.0});
    CHECK(d.grid_probs() == vd{0.25, 0.5, 0.25});
    CHECK(d.tail(0.0) == Catch::Approx(0.75));
    CHECK(d.tail(0.5) == Catch::Approx(0.75));
    CHECK(d.tail(1.0) == Catch::Approx(0.25));
    CHECK(d.tail(2.9) == Catch::Approx(0.25));
    CHECK(d.tail(3.0) == 0.0);
    CHECK(d.tail(100.0) == 0.0);

    // A sum within 1e-12 of 1 is accepted and renormalized to exactly 1.
    const auto nudged = weight_distribution::grid({1.0, 2.0}, {0.5, 0.5 - 5e-13});
    CHECK(nudged.tail(0.0) == 1.0);

    const auto p = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(p.grid_values(), unsupported_error);
    CHECK_THROWS_AS(p.grid_probs(), unsupported_error);
}

TEST_CASE("weight spec parsing round-trips and rejects malformed input") {
    const auto d = weight_distribution::parse("pareto:alpha=2,xmin=1");
    CHECK(d.tail_index() == 2.0);
    CHECK(d.lower_endpoint() == 1.0);

    const auto spaced = weight_distribution::parse("  pareto : alpha = 2.5 , xmin = 0.5 ");
    CHECK(spaced.tail_index() == 2.5);
    CHECK(spaced.lower_endpoint() == 0.5);

    const auto g = weight_distribution::parse("grid:values=0,1,3;probs=0.25,0.5,0.25");
    CHECK(g.mean() == Catch::Approx(1.25));
    CHECK(g.grid_values().size() == 3);

    // canonical() emits a spec that parses back to the same distribution.
    for (const auto* spec : {"pareto:alpha=2,xmin=1", "pareto:alpha=3.5,xmin=0.25",
                             "grid:values=0,1,3;probs=0.25,0.5,0.25"}) {
        const auto a = weight_distribution::parse(spec);
        const auto b = weight_distribution::parse(a.canonical());
        CHECK(a.canonical() == b.canonical());
        CHECK(a.mean() == b.mean());
    }

    CHECK_THROWS_AS(weight_distribution::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto"), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("cauchy:alpha=2,xmin=1"), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:alpha=2"), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:xmin=1"), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:alpha=2,alpha=3,xmin=1"),
                    std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:alpha=two,xmin=1"),
                    std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:alpha=2,xmin="), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("grid:values=1,2"), std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("grid:values=1,2;probs=0.5"),
                    std::invalid_argument);
    CHECK_THROWS_AS(weight_distribution::parse("pareto:alpha=1,xmin=1"), std::invalid_argument);
}

TEST_CASE("unconditional sampling matches the tail function") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    random_stream rng(101, 0, stream_purpose::weights);
    constexpr std::uint64_t trials = 200000;
    std::uint64_t over_15 = 0, over_2 = 0, over_4 = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const double x = d.sample(rng);
        REQUIRE(x >= 1.0);
        over_15 += x > 1.5 ? 1 : 0;
        over_2 += x > 2.0 ? 1 : 0;
        over_4 += x > 4.0 ? 1 : 0;
    }
    check_fraction(over_15, trials, d.tail(1.5));
    check_fraction(over_2, trials, d.tail(2.0));
    check_fraction(over_4, trials, d.tail(4.0));

    const auto g = weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25});
    random_stream grng(101, 1, stream_purpose::weights);
    std::uint64_t at0 = 0, at1 = 0, at3 = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const double x = g.sample(grng);
        if (x == 0.0) ++at0;
        else if (x == 1.0) ++at1;
        else if (x == 3.0) ++at3;
        else FAIL("grid sample produced a value off the grid");
    }
    check_fraction(at0, trials, 0.25);
    check_fraction(at1, trials, 0.5);
    check_fraction(at3, trials, 0.25);
}

TEST_CASE("sampling is reproducible per stream and differs across seeds") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    random_stream a(7, 3, stream_purpose::weights);
    random_stream b(7, 3, stream_purpose::weights);
    random_stream c(8, 3, stream_purpose::weights);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const double xa = d.sample(a);
        all_equal = all_equal && xa == d.sample(b);
        any_diff = any_diff || xa != d.sample(c);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("pure power-law conditional sampler") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS([&] {
        random_stream rng(1, 0, stream_purpose::generic);
        return d.sample_conditional(0.0, rng);
    }(), std::invalid_argument);

    // X^b has support [b, inf) and P(X^b > x) = (b/x)^alpha regardless of xmin.
    random_stream rng(11, 0, stream_purpose::generic);
    constexpr std::uint64_t trials = 200000;
    const double b = 5.0;
    std::uint64_t over = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const double x = d.sample_conditional(b, rng);
        REQUIRE(x >= b);
        over += x > 10.0 ? 1 : 0;
    }
    check_fraction(over, trials, 0.25);

    const auto g = weight_distribution::grid({1.0, 2.0}, {0.5, 0.5});
    CHECK_THROWS_AS([&] {
        random_stream r(1, 0, stream_purpose::generic);
        return g.sample_conditional(1.0, r);
    }(), unsupported_error);
}

TEST_CASE("restricted samplers stay in range and match the restricted law") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    constexpr std::uint64_t trials = 200000;

    SECTION("pareto above a cut") {
        random_stream rng(21, 0, stream_purpose::generic);
        std::uint64_t over = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            const double x = d.sample_given_above(3.0, rng);
            REQUIRE(x >= 3.0);
            over += x > 4.5 ? 1 : 0;
        }
        // P(X > 4.5 | X > 3) = tail(4.5)/tail(3) = (3/4.5)^2.
        check_fraction(over, trials, d.tail(4.5) / d.tail(3.0));
    }

    SECTION("a cut at or below the endpoint conditions on nothing") {
        random_stream a(22, 0, stream_purpose::generic);
        random_stream b(22, 0, stream_purpose::generic);
        for (int i = 0; i < 64; ++i) {
            CHECK(d.sample_given_above(0.5, a) == d.sample(b));
        }
    }

    SECTION("pareto at or below a cut") {
        random_stream rng(23, 0, stream_purpose::generic);
        std::uint64_t under = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            const double x = d.sample_given_at_most(3.0, rng);
            REQUIRE(x >= 1.0);
            REQUIRE(x <= 3.0);
            under += x <= 1.5 ? 1 : 0;
        }
        // P(X <= 1.5 | X <= 3) = (1 - tail(1.5)) / (1 - tail(3)).
        check_fraction(under, trials, (1.0 - d.tail(1.5)) / (1.0 - d.tail(3.0)));
    }

    SECTION("empty conditioning ranges are rejected") {
        random_stream rng(24, 0, stream_purpose::generic);
        CHECK_THROWS_AS(d.sample_given_at_most(1.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(d.sample_given_at_most(0.5, rng), std::invalid_argument);
        const auto g = weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25});
        CHECK_THROWS_AS(g.sample_given_above(3.0, rng), std::invalid_argument);
    }

    SECTION("grid restrictions renormalize over the surviving atoms") {
        const auto g = weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25});
        random_stream rng(25, 0, stream_purpose::generic);
        std::uint64_t at0 = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            const double x = g.sample_given_at_most(1.0, rng);
            REQUIRE(x <= 1.0);
            at0 += x == 0.0 ? 1 : 0;
        }
        check_fraction(at0, trials, 0.25 / 0.75);

        random_stream rng2(26, 0, stream_purpose::generic);
        for (int i = 0; i < 64; ++i) {
            CHECK(g.sample_given_above(1.0, rng2) == 3.0);
        }
    }
}

TEST_CASE("conditional mixture reproduces the marginal mean") {
    // tail(b) E[g(X) | X > b] + (1 - tail(b)) E[g(X) | X <= b] = E[g(X)]
    // with g(x) = min(x, 6); for Pareto(2,1), E[min(X, c)] = 2 - 1/c.
    const auto d = weight_distribution::pareto(2.0, 1.0);
    const double b = 2.0, c = 6.0;
    constexpr std::uint64_t trials = 200000;
    random_stream above(31, 0, stream_purpose::generic);
    random_stream below(31, 1, stream_purpose::generic);
    double sum_above = 0.0, sum_below = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        sum_above += std::min(d.sample_given_above(b, above), c);
        sum_below += std::min(d.sample_given_at_most(b, below), c);
    }
    const double mix = d.tail(b) * sum_above / trials + (1.0 - d.tail(b)) * sum_below / trials;
    CHECK(mix == Catch::Approx(2.0 - 1.0 / c).margin(0.07));
}
