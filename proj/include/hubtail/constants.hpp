#pragma once

#include <hubtail/errors.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/parallel.hpp>
#include <hubtail/rng.hpp>
#include <hubtail/weights.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace hubtail {

struct hubs_info {
    int k = 0;                 // ceil(a/mu)
    bool integer_ratio = false; // a/mu integral within 1e-12 relative
};

/// Number of hubs driving the tail event at excess a: k = ceil(a/mu).
/// Integrality of a/mu is detected to 1e-12 relative tolerance because the
/// asymptotic constant is undefined exactly at those transition points.
inline hubs_info hubs_required(double a, double mu) {
    if (!(a > 0.0)) throw std::invalid_argument("hubs_required needs a > 0");
    if (!(mu > 0.0)) throw std::invalid_argument("hubs_required needs mu > 0");
    const double ratio = a / mu;
    const double nearest = std::round(ratio);
    hubs_info out;
    out.integer_ratio =
        nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-12 * std::max(1.0, ratio);
    out.k = out.integer_ratio ? static_cast<int>(nearest)
                              : static_cast<int>(std::ceil(ratio));
    return out;
}

/// phi(eta) = E[min{eta X, mu}] with mu = mean(d). Closed forms per family;
/// concave, non-decreasing, phi(0) = 0, phi <= mu.
inline double truncated_mean(const weight_distribution& d, double eta) {
    if (!(eta >= 0.0)) throw std::domain_error("truncated mean requires eta >= 0");
    const double mu = d.mean();
    if (eta == 0.0) return 0.0;
    if (d.family() == weight_family::grid) {
        kahan_sum s;
        const auto& v = d.grid_values();
        const auto& p = d.grid_probs();
        for (std::size_t i = 0; i < v.size(); ++i) s.add(p[i] * std::min(eta * v[i], mu));
        return s.value();
    }
    const double alpha = d.tail_index();
    const double xmin = d.lower_endpoint();
    const double c = mu / eta; // weight above which eta*X is capped at mu
    if (c <= xmin) return mu;
    double partial_mean; // E[X 1{X < c}]
    double tail_c;       // P(X > c)
    if (alpha == 2.0) {
        partial_mean = 2.0 * xmin - 2.0 * xmin * xmin / c;
        tail_c = (xmin / c) * (xmin / c);
    } else {
        partial_mean = alpha / (alpha - 1.0) * std::pow(xmin, alpha) *
                       (std::pow(xmin, 1.0 - alpha) - std::pow(c, 1.0 - alpha));
        tail_c = std::pow(xmin / c, alpha);
    }
    return eta * partial_mean + mu * tail_c;
}

/// sup over eta of phi(eta); equals mu * P(X > 0). The supremum is attained
/// at finite eta whenever the smallest positive support point exists.
inline double truncated_mean_sup(const weight_distribution& d) {
    return d.mean() * d.tail(0.0);
}

/// eta(a): smallest eta with (k-1)mu + phi(eta) >= a, where k = ceil(a/mu).
/// Bisection to 1e-12 absolute, except at integer a/mu where phi must
/// saturate: there the smallest saturating eta is the closed-form boundary
/// mu/u*, or no finite eta exists when u* = 0.
inline double eta_of(const weight_distribution& d, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("eta_of needs a > 0");
    const double mu = d.mean();
    const hubs_info hubs = hubs_required(a, mu);
    if (hubs.integer_ratio) {
        const double u_star = d.lower_endpoint();
        if (u_star > 0.0) return mu / u_star;
        throw eta_infinite_error(
            "no finite hub scale: a/mu is an integer and the weight support reaches 0, "
            "so E[min{eta X, mu}] never attains mu");
    }
    const double target = a - (hubs.k - 1) * mu; // in (0, mu) for non-integer ratios
    if (target >= truncated_mean_sup(d)) {
        throw eta_infinite_error(
            "no finite hub scale: required truncated mean exceeds its supremum "
            "mu*P(X>0) for this distribution");
    }
    double hi = 1.0;
    while (truncated_mean(d, hi) < target) {
        hi *= 2.0;
        if (hi > 1e300) {
            throw eta_infinite_error("no finite hub scale: truncated mean target unreachable");
        }
    }
    double lo = 0.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_mean(d, mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

/// C(a_1,...,a_k) = sum_i phi(a_i): expected capped contribution of hubs at
/// scales a_i. Symmetric, monotone in each argument, bounded by k*mu.
inline double c_value(const weight_distribution& d, const std::vector<double>& hub_scales) {
    if (hub_scales.empty()) throw std::invalid_argument("c_value needs at least one hub scale");
    kahan_sum s;
    for (double h : hub_scales) {
        if (!(h >= 0.0)) throw std::invalid_argument("c_value needs non-negative hub scales");
        s.add(truncated_mean(d, h));
    }
    return s.value();
}

struct exceed_estimate {
    double p_hat = 0.0;
    double std_err = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
};

/// Monte Carlo estimate of P(C(X_1^level,...,X_k^level) >= a) over k i.i.d.
/// draws from the pure power law at the given level. k defaults to
/// ceil(a/mu); pass k explicitly to probe other hub counts (the probability
/// is well defined for any k, and the default makes a > k*mu impossible).
inline exceed_estimate estimate_exceed_prob(const weight_distribution& d, double a,
                                            double level, std::uint64_t trials,
                                            std::uint64_t seed,
                                            std::optional<int> k = std::nullopt,
                                            int workers = 0,
                                            std::uint64_t batch = default_batch) {
    if (!(level > 0.0)) throw std::invalid_argument("exceedance level must be > 0");
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    const int nhubs = k ? *k : hubs_required(a, d.mean()).k;
    if (nhubs < 1) throw std::invalid_argument("hub count must be >= 1");
    if (!d.has_tail_index()) {
        throw unsupported_error("exceedance probability is defined through the tail index; "
                                "grid distributions have none");
    }

    const auto partials = run_batches<std::uint64_t>(
        trials, batch, workers, [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            std::uint64_t hits = 0;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream rng(seed, t, stream_purpose::exceed);
                kahan_sum c;
                for (int i = 0; i < nhubs; ++i) {
                    c.add(truncated_mean(d, d.sample_conditional(level, rng)));
                }
                hits += c.value() >= a ? 1 : 0;
            }
            return hits;
        });
    std::uint64_t hits = 0;
    for (std::uint64_t h : partials) hits += h;

    exceed_estimate out;
    out.hits = hits;
    out.trials = trials;
    out.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    out.std_err = std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(trials));
    return out;
}

struct asymptote_params {
    double a = 0.0;      // excess target the bundle was built for
    int k = 0;           // hub count ceil(a/mu)
    double eta = 0.0;    // hub scale eta(a)
    double K_hat = 0.0;  // eta^{-k*alpha} * P(C(X^eta) >= a), Monte Carlo
    double K_stderr = 0.0;
    std::uint64_t trials = 0;
};

/// The tail-curve prefactor K(a) = eta^{-k alpha} P(C(X_1^eta,...,X_k^eta) >= a),
/// estimated by Monte Carlo. Defined only away from integer a/mu.
inline asymptote_params k_of_a_constant(const weight_distribution& d, double a,
                                        std::uint64_t trials, std::uint64_t seed,
                                        int workers = 0,
                                        std::uint64_t batch = default_batch) {
    const hubs_info hubs = hubs_required(a, d.mean());
    if (hubs.integer_ratio) {
        throw integer_ratio_error(
            "tail constant undefined: a/mu is an integer, where the hub count jumps "
            "(requires non-integer a/mu)");
    }
    asymptote_params out;
    out.a = a;
    out.k = hubs.k;
    out.eta = eta_of(d, a);
    out.trials = trials;
    const double scale = std::pow(out.eta, -static_cast<double>(hubs.k) * d.tail_index());
    const exceed_estimate ex = estimate_exceed_prob(d, a, out.eta, trials, seed,
                                                    hubs.k, workers, batch);
    out.K_hat = scale * ex.p_hat;
    out.K_stderr = scale * ex.std_err;
    return out;
}

/// Large-deviation rate function for the centered, scaled edge count:
/// (alpha-1)*ceil(x) for x >= 0, +infinity below 0.
inline double rate_function(double x, double alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("rate_function needs alpha > 1");
    if (x < 0.0) return std::numeric_limits<double>::infinity();
    return (alpha - 1.0) * std::ceil(x);
}

/// Asymptotic tail curve K(a) * (n P(X > n))^k evaluated from a prepared
/// parameter bundle.
inline double sn_asymptote(const weight_distribution& d, const asymptote_params& params,
                           std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("sn_asymptote needs n >= 1");
    const double factor = static_cast<double>(n) * d.tail(static_cast<double>(n));
    return params.K_hat * std::pow(factor, params.k);
}

inline double sn_asymptote(const weight_distribution& d, double a, std::uint64_t n,
                           std::uint64_t trials, std::uint64_t seed) {
    return sn_asymptote(d, k_of_a_constant(d, a, trials, seed), n);
}

/// Edge-count version: the excess-edge tail at level a follows the curve for
/// the pair statistic at level mu*a, with hub count ceil(a). Requires
/// non-integer a.
inline asymptote_params en_asymptote_params(const weight_distribution& d, double a,
                                            std::uint64_t trials, std::uint64_t seed,
                                            int workers = 0,
                                            std::uint64_t batch = default_batch) {
    if (!(a > 0.0)) throw std::invalid_argument("en_asymptote needs a > 0");
    const double nearest = std::round(a);
    if (nearest >= 1.0 && std::abs(a - nearest) <= 1e-12 * std::max(1.0, a)) {
        throw integer_ratio_error(
            "edge tail constant undefined: a is an integer, where the hub count jumps "
            "(requires non-integer a)");
    }
    return k_of_a_constant(d, d.mean() * a, trials, seed, workers, batch);
}

inline double en_asymptote(const weight_distribution& d, double a, std::uint64_t n,
                           std::uint64_t trials, std::uint64_t seed) {
    return sn_asymptote(d, en_asymptote_params(d, a, trials, seed), n);
}

} // namespace hubtail
