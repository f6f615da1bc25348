#include <hubtail/constants.hpp>

#include <hubtail/errors.hpp>
#include <hubtail/weights.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

using hubtail::estimate_exceed_prob;
using hubtail::eta_infinite_error;
using hubtail::eta_of;
using hubtail::hubs_required;
using hubtail::integer_ratio_error;
using hubtail::k_of_a_constant;
using hubtail::truncated_mean;
using hubtail::truncated_mean_sup;
using hubtail::unsupported_error;
using hubtail::weight_distribution;

namespace {

const double eta_ref = 2.0 - std::sqrt(2.0); // eta(1) = eta(3) for Pareto(2,1)

// Exact exceedance probability for two hubs at excess 3 under Pareto(2,1):
// with phi(x) = 2x - x^2/2 (x <= 2) and X, Y pure power laws at level eta,
// P(phi(X) + phi(Y) >= 3)
//   = (eta/2)^2 + integral_eta^2 (eta/g(x))^2 2 eta^2 x^-3 dx,
// where g(x) = 2 - sqrt(2 phi(x) - 2) inverts phi(y) = 3 - phi(x). The
// integrand is smooth except for a sqrt kink at x = eta, so composite
// Simpson with many panels is accurate far beyond Monte Carlo resolution.
double exceed_two_hub_oracle() {
    const double eta = eta_ref;
    const auto integrand = [&](double x) {
        const double phi = 2.0 * x - 0.5 * x * x;
        const double g = 2.0 - std::sqrt(std::max(2.0 * phi - 2.0, 0.0));
        return (eta / g) * (eta / g) * 2.0 * eta * eta / (x * x * x);
    };
    const int panels = 200000;
    const double lo = eta, hi = 2.0;
    const double h = (hi - lo) / panels;
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < panels; ++i) {
        sum += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return (eta / 2.0) * (eta / 2.0) + sum * h / 3.0;
}

} // namespace

TEST_CASE("hub count is the ceiling of a/mu with integer detection") {
    CHECK_THROWS_AS(hubs_required(0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(hubs_required(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(hubs_required(1.0, 0.0), std::invalid_argument);

    auto h = hubs_required(1.0, 2.0);
    CHECK(h.k == 1);
    CHECK_FALSE(h.integer_ratio);

    h = hubs_required(2.0, 2.0);
    CHECK(h.k == 1);
    CHECK(h.integer_ratio);

    h = hubs_required(2.0000001, 2.0);
    CHECK(h.k == 2);
    CHECK_FALSE(h.integer_ratio);

    h = hubs_required(4.0, 2.0);
    CHECK(h.k == 2);
    CHECK(h.integer_ratio);

    // Within 1e-12 relative of an integer counts as that integer.
    h = hubs_required(2.0 * (2.0 - 1e-13), 2.0);
    CHECK(h.k == 2);
    CHECK(h.integer_ratio);

    // Ratios rounding to zero are never "integer": the hub count floor is 1.
    h = hubs_required(1e-9, 2.0);
    CHECK(h.k == 1);
    CHECK_FALSE(h.integer_ratio);
}

TEST_CASE("truncated mean has closed form 2 eta - eta^2/2 for Pareto(2,1)") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(truncated_mean(d, -0.1), std::domain_error);
    CHECK(truncated_mean(d, 0.0) == 0.0);
    for (double eta : {0.1, 0.25, 0.5, eta_ref, 1.0, 1.5, 1.999}) {
        CHECK(truncated_mean(d, eta) == Catch::Approx(2.0 * eta - 0.5 * eta * eta).epsilon(1e-13));
    }
    CHECK(truncated_mean(d, 2.0) == 2.0);
    CHECK(truncated_mean(d, 50.0) == 2.0);
    CHECK(truncated_mean_sup(d) == 2.0);
}

TEST_CASE("truncated mean is monotone, concave, and capped at mu") {
    const auto cases = {weight_distribution::pareto(2.0, 1.0),
                        weight_distribution::pareto(3.0, 2.0),
                        weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25})};
    for (const auto& d : cases) {
        double prev = 0.0;
        std::vector<double> vals;
        for (int i = 0; i <= 200; ++i) {
            const double eta = 0.02 * i;
            const double v = truncated_mean(d, eta);
            CHECK(v >= prev - 1e-15);
            CHECK(v <= d.mean() + 1e-15);
            vals.push_back(v);
            prev = v;
        }
        for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
            CHECK(vals[i] >= 0.5 * (vals[i - 1] + vals[i + 1]) - 1e-12);
        }
        CHECK(truncated_mean(d, 1e9) == Catch::Approx(truncated_mean_sup(d)));
    }
}

TEST_CASE("grid truncated mean sums atom contributions exactly") {
    const auto g = weight_distribution::grid({0.0, 1.0, 3.0}, {0.25, 0.5, 0.25});
    // mu = 1.25; phi(eta) = 0.5 min(eta, 1.25) + 0.25 min(3 eta, 1.25).
    CHECK(truncated_mean(g, 0.2) == Catch::Approx(0.5 * 0.2 + 0.25 * 0.6).epsilon(1e-14));
    CHECK(truncated_mean(g, 1.0) == Catch::Approx(0.5 * 1.0 + 0.25 * 1.25).epsilon(1e-14));
    CHECK(truncated_mean(g, 10.0) == Catch::Approx(0.75 * 1.25).epsilon(1e-14));
    CHECK(truncated_mean_sup(g) == Catch::Approx(0.75 * 1.25).epsilon(1e-14));
}

TEST_CASE("eta solves the hub-scale equation") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(eta_of(d, 0.0), std::invalid_argument);

    // k=1: phi(eta) = 1 at eta = 2 - sqrt(2); k=2 with a=3 hits the same
    // boundary because the target is again a - (k-1) mu = 1.
    CHECK(eta_of(d, 1.0) == Catch::Approx(eta_ref).margin(1e-11));
    CHECK(eta_of(d, 3.0) == Catch::Approx(eta_ref).margin(1e-11));

    // Solution property at a generic a: phi(eta) straddles the target.
    for (double a : {0.5, 1.3, 1.9, 2.7, 4.4}) {
        const auto hubs = hubs_required(a, d.mean());
        const double target = a - (hubs.k - 1) * d.mean();
        const double eta = eta_of(d, a);
        CHECK(truncated_mean(d, eta) >= target - 1e-9);
        CHECK(truncated_mean(d, eta - 1e-9) < target + 1e-9);
    }

    // Monotone in a within a fixed hub count.
    CHECK(eta_of(d, 0.5) < eta_of(d, 1.0));
    CHECK(eta_of(d, 1.0) < eta_of(d, 1.9));

    // Integer a/mu: the smallest saturating scale is mu / lower endpoint.
    CHECK(eta_of(d, 2.0) == 2.0);
    CHECK(eta_of(d, 4.0) == 2.0);
    const auto g13 = weight_distribution::grid({1.0, 3.0}, {0.5, 0.5});
    CHECK(eta_of(g13, 2.0) == 2.0);
    CHECK(truncated_mean(g13, 2.0) == Catch::Approx(g13.mean()));
    CHECK(truncated_mean(g13, 2.0 - 1e-9) < g13.mean());

    // Support reaching 0: integer ratio has no finite scale, and targets at
    // or above the supremum mu*P(X>0) are unreachable for any a.
    const auto g01 = weight_distribution::grid({0.0, 1.0}, {0.5, 0.5});
    CHECK_THROWS_AS(eta_of(g01, 0.5), eta_infinite_error);
    CHECK_THROWS_AS(eta_of(g01, 0.3), eta_infinite_error);
    CHECK(eta_of(g01, 0.2) == Catch::Approx(0.4).margin(1e-11));
}

TEST_CASE("c_value sums truncated means over hub scales") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(hubtail::c_value(d, {}), std::invalid_argument);
    CHECK_THROWS_AS(hubtail::c_value(d, {1.0, -0.5}), std::invalid_argument);
    CHECK(hubtail::c_value(d, {1.0}) == Catch::Approx(1.5));
    CHECK(hubtail::c_value(d, {1.0, 1.0}) == Catch::Approx(3.0));
    CHECK(hubtail::c_value(d, {eta_ref, 5.0}) == Catch::Approx(3.0));
    CHECK(hubtail::c_value(d, {0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("single-hub exceedance at the critical scale is certain") {
    // At level eta(1), phi(X) >= phi(eta) = 1 for every draw, so the hit
    // fraction is exactly 1 with zero standard error. This pins both the
    // sampler support (X^eta >= eta) and the hit predicate.
    const auto d = weight_distribution::pareto(2.0, 1.0);
    const double eta = eta_of(d, 1.0);
    const auto est = estimate_exceed_prob(d, 1.0, eta, 50000, 7);
    CHECK(est.p_hat == 1.0);
    CHECK(est.std_err == 0.0);
    CHECK(est.hits == est.trials);

    // And the tail constant is exactly eta^{-alpha}: 1.5 + sqrt(2).
    const auto params = k_of_a_constant(d, 1.0, 50000, 7);
    CHECK(params.k == 1);
    CHECK(params.eta == Catch::Approx(eta_ref).margin(1e-11));
    CHECK(params.K_hat == Catch::Approx(1.5 + std::sqrt(2.0)).epsilon(1e-9));
    CHECK(params.K_stderr == 0.0);
}

TEST_CASE("exceedance probability matches quadrature for two hubs") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    const double eta = eta_of(d, 3.0);
    const double exact = exceed_two_hub_oracle();
    constexpr std::uint64_t trials = 400000;
    const auto est = estimate_exceed_prob(d, 3.0, eta, trials, 11);
    const double sigma = std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
    CHECK(std::abs(est.p_hat - exact) <= 5.0 * sigma);

    // Same constant through the bundled interface.
    const auto params = k_of_a_constant(d, 3.0, trials, 11);
    CHECK(params.k == 2);
    const double scale = std::pow(eta, -4.0);
    CHECK(params.K_hat == Catch::Approx(scale * est.p_hat).epsilon(1e-12));
    CHECK(std::abs(params.K_hat - scale * exact) <= 5.0 * scale * sigma);
}

TEST_CASE("exceedance probability scales exactly below the critical level") {
    // The event forces every coordinate above eta, so sampling at a lower
    // level epsilon only rescales the probability by (epsilon/eta)^(k alpha).
    const auto d = weight_distribution::pareto(2.0, 1.0);
    constexpr std::uint64_t trials = 300000;

    const double eta1 = eta_of(d, 1.0);
    const auto low1 = estimate_exceed_prob(d, 1.0, 0.5 * eta1, trials, 13);
    const double sigma1 = std::sqrt(0.25 * 0.75 / static_cast<double>(trials));
    CHECK(std::abs(low1.p_hat - 0.25) <= 5.0 * sigma1);

    const double eta3 = eta_of(d, 3.0);
    const auto at3 = estimate_exceed_prob(d, 3.0, eta3, trials, 17);
    const auto low3 = estimate_exceed_prob(d, 3.0, 0.5 * eta3, trials, 19);
    const double expect = at3.p_hat / 16.0; // (1/2)^(k alpha) with k=2, alpha=2
    const double sigma = std::hypot(at3.std_err / 16.0, low3.std_err);
    CHECK(std::abs(low3.p_hat - expect) <= 5.0 * sigma);
}

TEST_CASE("exceedance estimator guards and explicit hub counts") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(estimate_exceed_prob(d, 1.0, 0.0, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_exceed_prob(d, 1.0, 1.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_exceed_prob(d, 1.0, 1.0, 100, 1, 0), std::invalid_argument);
    const auto g = weight_distribution::grid({1.0, 2.0}, {0.5, 0.5});
    CHECK_THROWS_AS(estimate_exceed_prob(g, 1.0, 1.0, 100, 1), unsupported_error);

    // With k hubs the statistic is capped at k*mu, so a > k*mu is impossible.
    const auto none = estimate_exceed_prob(d, 2.5, 1.0, 20000, 3, 1);
    CHECK(none.p_hat == 0.0);
    CHECK(none.std_err == 0.0);
    CHECK(none.hits == 0);
}

TEST_CASE("exceedance estimate is independent of the worker count") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    const auto one = estimate_exceed_prob(d, 3.0, 0.4, 40000, 23, std::nullopt, 1, 1024);
    const auto four = estimate_exceed_prob(d, 3.0, 0.4, 40000, 23, std::nullopt, 4, 1024);
    CHECK(one.hits == four.hits);
    CHECK(one.p_hat == four.p_hat);
}

TEST_CASE("tail constant requires a non-integer hub ratio") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(k_of_a_constant(d, 2.0, 100, 1), integer_ratio_error);
    CHECK_THROWS_AS(k_of_a_constant(d, 4.0, 100, 1), integer_ratio_error);
}

TEST_CASE("rate function counts hubs at slope alpha - 1") {
    using hubtail::rate_function;
    CHECK_THROWS_AS(rate_function(1.0, 1.0), std::invalid_argument);
    CHECK(std::isinf(rate_function(-0.1, 2.0)));
    CHECK(rate_function(0.0, 2.0) == 0.0);
    CHECK(rate_function(0.5, 2.0) == 1.0);
    CHECK(rate_function(1.0, 2.0) == 1.0);
    CHECK(rate_function(1.2, 2.0) == 2.0);
    CHECK(rate_function(2.5, 3.0) == 6.0);
}

TEST_CASE("asymptotic tail curves evaluate K (n tail(n))^k") {
    const auto d = weight_distribution::pareto(2.0, 1.0);
    const auto params = k_of_a_constant(d, 1.0, 1000, 1);
    // n tail(n) = 1/n for Pareto(2,1).
    CHECK(hubtail::sn_asymptote(d, params, 100) ==
          Catch::Approx((1.5 + std::sqrt(2.0)) / 100.0).epsilon(1e-9));
    CHECK_THROWS_AS(hubtail::sn_asymptote(d, params, 0), std::invalid_argument);

    // Edge version: excess a maps to pair excess mu*a and hub count ceil(a).
    CHECK_THROWS_AS(hubtail::en_asymptote_params(d, 1.0, 100, 1), integer_ratio_error);
    CHECK_THROWS_AS(hubtail::en_asymptote_params(d, 2.0, 100, 1), integer_ratio_error);
    CHECK_THROWS_AS(hubtail::en_asymptote_params(d, -0.5, 100, 1), std::invalid_argument);
    const auto ep = hubtail::en_asymptote_params(d, 0.5, 2000, 5);
    const auto sp = k_of_a_constant(d, 1.0, 2000, 5);
    CHECK(ep.k == 1);
    CHECK(ep.K_hat == sp.K_hat);
    CHECK(hubtail::en_asymptote(d, 0.5, 100, 2000, 5) ==
          Catch::Approx(hubtail::sn_asymptote(d, sp, 100)));
}
