#pragma once

#include <hubtail/constants.hpp>
#include <hubtail/errors.hpp>
#include <hubtail/graphstats.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/parallel.hpp>
#include <hubtail/rng.hpp>
#include <hubtail/weights.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hubtail {

struct estimator_config {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 42;
    std::optional<double> eps;     // hub cut as a fraction of n; default eta(a)/2
    std::optional<int> k_override; // force the planted hub count; needs explicit eps
    std::uint64_t batch = default_batch;
    int workers = 0;               // 0: resolve from HUBTAIL_WORKERS / hardware
    bool include_total = false;    // fold the naive N != k remainder into p_hat
};

struct tail_estimate {
    double p_hat = 0.0;
    double std_err = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t trials = 0;
    double hits_or_ess = 0.0;
    std::string method;
    std::optional<double> eps_used; // resolved hub cut (planted only)
    std::optional<int> k_used;      // resolved hub count (planted only)
    // Labeled sub-quantities; for the planted scheme: the N=k estimate, the
    // naive N<k sub-estimate, the certified N>k over-estimate, and for the
    // edge target the companion conditional-mean estimate.
    std::map<std::string, double> components;
};

/// Event thresholds. The pair-statistic tail is P(S_n > (mu^2/2 + a) n^2);
/// the edge tail is P(E_n > (mu/2 + a) n).
inline double sn_threshold(double mu, std::uint64_t n, double a) {
    const double nn = static_cast<double>(n);
    return (0.5 * mu * mu + a) * nn * nn;
}

inline double en_threshold(double mu, std::uint64_t n, double a) {
    return (0.5 * mu + a) * static_cast<double>(n);
}

namespace detail {

inline constexpr double z95 = 1.959963984540054;

/// 95% interval for scale * proportion. Normal approximation, switching to
/// Wilson when fewer than 30 hits (rare-event counts are small and the
/// normal interval collapses around 0 there).
inline std::pair<double, double> proportion_ci95(std::uint64_t hits, std::uint64_t trials,
                                                 double scale) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    double lo, hi;
    if (hits >= 30) {
        const double se = std::sqrt(p * (1.0 - p) / n);
        lo = std::max(0.0, p - z95 * se);
        hi = std::min(1.0, p + z95 * se);
    } else {
        const double z2 = z95 * z95;
        const double denom = 1.0 + z2 / n;
        const double center = (p + z2 / (2.0 * n)) / denom;
        const double half = z95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
        lo = std::max(0.0, center - half);
        hi = std::min(1.0, center + half);
    }
    return {scale * lo, scale * hi};
}

/// Everything fixed about one planted-hub run: the hub count, the cut, and
/// the constant likelihood weight C(n,k) p^k (1-p)^(n-k) that converts the
/// conditioned hit fraction into P(event, N_{n,eps} = k).
struct planted_scheme {
    int k = 0;
    double eps = 0.0;
    double eps_n = 0.0;
    double tail_eps_n = 0.0;
    double weight = 0.0;
    double greater_bound = 0.0; // (n tail(eps n))^(k+1), certified N>k over-estimate
};

/// target_a is on the pair-statistic scale: the hub count is ceil(a/mu) and
/// eps must sit strictly below the critical hub scale eta(a), where the
/// planted decomposition is valid. A k_override bypasses the eta guard (the
/// guard presumes k = ceil(a/mu)), so it demands an explicit eps.
inline planted_scheme make_planted_scheme(const weight_distribution& d, std::uint64_t n,
                                          double target_a, const estimator_config& cfg) {
    if (!(target_a > 0.0)) throw std::invalid_argument("tail estimators need a > 0");
    if (n < 1) throw std::invalid_argument("tail estimators need n >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
    planted_scheme s;
    if (cfg.k_override) {
        if (!cfg.eps) {
            throw std::invalid_argument("k override bypasses the eps < eta(a) validity check, "
                                        "so eps must be given explicitly");
        }
        s.k = *cfg.k_override;
        s.eps = *cfg.eps;
    } else {
        s.k = hubs_required(target_a, d.mean()).k;
        const double eta = eta_of(d, target_a);
        s.eps = cfg.eps.value_or(0.5 * eta);
        if (!(s.eps < eta)) {
            throw std::invalid_argument(
                "eps must lie strictly below the critical hub scale eta(a) = " +
                format_double(eta) + "; the hub decomposition is only valid there");
        }
    }
    if (!(s.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (s.k < 1 || static_cast<std::uint64_t>(s.k) > n) {
        throw std::invalid_argument("hub count must lie in [1, n]");
    }
    s.eps_n = s.eps * static_cast<double>(n);
    s.tail_eps_n = d.tail(s.eps_n);
    if (!(s.tail_eps_n > 0.0)) {
        throw std::invalid_argument("no weight mass above eps*n; hubs cannot be planted");
    }
    if (!(s.tail_eps_n < 1.0)) {
        throw std::invalid_argument("all weight mass lies above eps*n; there is no bulk");
    }
    double comb = 1.0;
    for (int i = 0; i < s.k; ++i) {
        comb *= static_cast<double>(n - static_cast<std::uint64_t>(i)) / (1.0 + i);
    }
    s.weight = comb * std::pow(s.tail_eps_n, s.k) *
               std::pow(1.0 - s.tail_eps_n, static_cast<double>(n) - s.k);
    s.greater_bound =
        std::pow(static_cast<double>(n) * s.tail_eps_n, static_cast<double>(s.k) + 1.0);
    return s;
}

/// First k coordinates conditioned above the cut, the rest at or below it:
/// exactly the hub pattern the decomposition integrates over.
inline weight_vector planted_weights(const weight_distribution& d, std::uint64_t n,
                                     const planted_scheme& s, random_stream& rng) {
    weight_vector wv;
    wv.n = n;
    wv.mu = d.mean();
    wv.w.resize(n);
    for (int i = 0; i < s.k; ++i) wv.w[static_cast<std::size_t>(i)] = d.sample_given_above(s.eps_n, rng);
    for (std::size_t i = static_cast<std::size_t>(s.k); i < n; ++i) {
        wv.w[i] = d.sample_given_at_most(s.eps_n, rng);
    }
    return wv;
}

struct remainder_counts {
    std::uint64_t below = 0; // event and N < k
    std::uint64_t off = 0;   // event and N != k
};

} // namespace detail

/// Naive Monte Carlo for P(S_n > (mu^2/2 + a) n^2).
inline tail_estimate estimate_sn_tail_naive(const weight_distribution& d, std::uint64_t n,
                                            double a, const estimator_config& cfg) {
    if (!(a > 0.0)) throw std::invalid_argument("tail estimators need a > 0");
    if (n < 1) throw std::invalid_argument("tail estimators need n >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
    const double thr = sn_threshold(d.mean(), n, a);
    const auto partials = run_batches<std::uint64_t>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            std::uint64_t hits = 0;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream rng(cfg.seed, t, stream_purpose::weights);
                hits += s_n(sample_weights(d, n, rng)) > thr ? 1 : 0;
            }
            return hits;
        });
    std::uint64_t hits = 0;
    for (auto h : partials) hits += h;

    tail_estimate out;
    out.method = "naive";
    out.trials = cfg.trials;
    out.hits_or_ess = static_cast<double>(hits);
    out.p_hat = static_cast<double>(hits) / static_cast<double>(cfg.trials);
    out.std_err = std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(cfg.trials));
    std::tie(out.ci_lo, out.ci_hi) = detail::proportion_ci95(hits, cfg.trials, 1.0);
    return out;
}

/// Planted-hub importance sampling for P(S_n > (mu^2/2 + a) n^2, N_{n,eps} = k).
/// Unbiased at every finite n: hubs use the exact conditional law of d above
/// eps*n (not the limiting power law), so the likelihood weight is the exact
/// constant C(n,k) tail(eps n)^k (1-tail(eps n))^(n-k).
///
/// Components report the proof-shaped split: the N<k remainder from a naive
/// sub-estimator and the N>k remainder as the certified first-moment bound.
/// include_total folds the unbiased naive N != k estimate into p_hat.
inline tail_estimate estimate_sn_tail_planted(const weight_distribution& d, std::uint64_t n,
                                              double a, const estimator_config& cfg) {
    const detail::planted_scheme scheme = detail::make_planted_scheme(d, n, a, cfg);
    const double thr = sn_threshold(d.mean(), n, a);

    const auto partials = run_batches<std::uint64_t>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            std::uint64_t hits = 0;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream rng(cfg.seed, t, stream_purpose::planted);
                hits += s_n(detail::planted_weights(d, n, scheme, rng)) > thr ? 1 : 0;
            }
            return hits;
        });
    std::uint64_t hits = 0;
    for (auto h : partials) hits += h;

    const auto sub = run_batches<detail::remainder_counts>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            detail::remainder_counts c;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream rng(cfg.seed, t, stream_purpose::remainder_weights);
                const weight_vector wv = sample_weights(d, n, rng);
                if (!(s_n(wv) > thr)) continue;
                const std::uint64_t hubs = hub_count(wv, scheme.eps);
                c.below += hubs < static_cast<std::uint64_t>(scheme.k) ? 1 : 0;
                c.off += hubs != static_cast<std::uint64_t>(scheme.k) ? 1 : 0;
            }
            return c;
        });
    detail::remainder_counts rem;
    for (const auto& c : sub) {
        rem.below += c.below;
        rem.off += c.off;
    }

    const double trials = static_cast<double>(cfg.trials);
    const double frac = static_cast<double>(hits) / trials;
    const double planted_p = scheme.weight * frac;
    const double planted_se = scheme.weight * std::sqrt(frac * (1.0 - frac) / trials);
    const double below_p = static_cast<double>(rem.below) / trials;
    const double off_p = static_cast<double>(rem.off) / trials;
    const double off_se = std::sqrt(off_p * (1.0 - off_p) / trials);

    tail_estimate out;
    out.method = "planted";
    out.eps_used = scheme.eps;
    out.k_used = scheme.k;
    out.trials = cfg.trials;
    out.hits_or_ess = static_cast<double>(hits);
    out.components["N=k"] = planted_p;
    out.components["N<k"] = below_p;
    out.components["N>k bound"] = scheme.greater_bound;
    if (cfg.include_total) {
        out.p_hat = planted_p + off_p;
        out.std_err = std::hypot(planted_se, off_se);
        out.ci_lo = std::max(0.0, out.p_hat - detail::z95 * out.std_err);
        out.ci_hi = std::min(1.0, out.p_hat + detail::z95 * out.std_err);
    } else {
        out.p_hat = planted_p;
        out.std_err = planted_se;
        std::tie(out.ci_lo, out.ci_hi) = detail::proportion_ci95(hits, cfg.trials, scheme.weight);
    }
    return out;
}

/// Naive Monte Carlo for P(E_n > (mu/2 + a) n), with the companion
/// conditional-mean estimate P(M_n > (mu/2 + a) n) from the same draws.
inline tail_estimate estimate_en_tail_naive(const weight_distribution& d, std::uint64_t n,
                                            double a, const estimator_config& cfg) {
    if (!(a > 0.0)) throw std::invalid_argument("tail estimators need a > 0");
    if (n < 1) throw std::invalid_argument("tail estimators need n >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
    if (n > edge_sampling_cap) {
        throw budget_error("edge sampling walks all pairs; n exceeds the cap of " +
                           std::to_string(edge_sampling_cap));
    }
    const double mu = d.mean();
    const double thr = en_threshold(mu, n, a);
    const double sn_thr = thr * mu * static_cast<double>(n); // M_n > thr iff S_n > thr*mu*n

    struct counts {
        std::uint64_t edge = 0, mean = 0;
    };
    const auto partials = run_batches<counts>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            counts c;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream wrng(cfg.seed, t, stream_purpose::weights);
                const weight_vector wv = sample_weights(d, n, wrng);
                random_stream erng(cfg.seed, t, stream_purpose::edges);
                c.edge += static_cast<double>(sample_edge_count(wv, erng)) > thr ? 1 : 0;
                c.mean += s_n(wv) > sn_thr ? 1 : 0;
            }
            return c;
        });
    counts total;
    for (const auto& c : partials) {
        total.edge += c.edge;
        total.mean += c.mean;
    }

    const double trials = static_cast<double>(cfg.trials);
    tail_estimate out;
    out.method = "naive";
    out.trials = cfg.trials;
    out.hits_or_ess = static_cast<double>(total.edge);
    out.p_hat = static_cast<double>(total.edge) / trials;
    out.std_err = std::sqrt(out.p_hat * (1.0 - out.p_hat) / trials);
    std::tie(out.ci_lo, out.ci_hi) = detail::proportion_ci95(total.edge, cfg.trials, 1.0);
    const double mean_p = static_cast<double>(total.mean) / trials;
    out.components["M_n"] = mean_p;
    out.components["M_n stderr"] = std::sqrt(mean_p * (1.0 - mean_p) / trials);
    return out;
}

/// Planted-hub estimator for P(E_n > (mu/2 + a) n, N_{n,eps} = k). Weights
/// are importance-sampled; edges are then sampled exactly given the weights,
/// so the indicator uses the true edge count while the likelihood ratio only
/// involves the weights. The hub count is ceil(a) (edge excess a corresponds
/// to pair excess mu*a) and eps must sit below eta(mu*a).
inline tail_estimate estimate_en_tail_planted(const weight_distribution& d, std::uint64_t n,
                                              double a, const estimator_config& cfg) {
    if (n > edge_sampling_cap) {
        throw budget_error("edge sampling walks all pairs; n exceeds the cap of " +
                           std::to_string(edge_sampling_cap));
    }
    const double mu = d.mean();
    const detail::planted_scheme scheme = detail::make_planted_scheme(d, n, mu * a, cfg);
    const double thr = en_threshold(mu, n, a);
    const double sn_thr = thr * mu * static_cast<double>(n);

    struct counts {
        std::uint64_t edge = 0, mean = 0;
    };
    const auto partials = run_batches<counts>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            counts c;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream wrng(cfg.seed, t, stream_purpose::planted);
                const weight_vector wv = detail::planted_weights(d, n, scheme, wrng);
                random_stream erng(cfg.seed, t, stream_purpose::edges);
                c.edge += static_cast<double>(sample_edge_count(wv, erng)) > thr ? 1 : 0;
                c.mean += s_n(wv) > sn_thr ? 1 : 0;
            }
            return c;
        });
    counts main;
    for (const auto& c : partials) {
        main.edge += c.edge;
        main.mean += c.mean;
    }

    const auto sub = run_batches<detail::remainder_counts>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            detail::remainder_counts c;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream wrng(cfg.seed, t, stream_purpose::remainder_weights);
                const weight_vector wv = sample_weights(d, n, wrng);
                random_stream erng(cfg.seed, t, stream_purpose::remainder_edges);
                if (!(static_cast<double>(sample_edge_count(wv, erng)) > thr)) continue;
                const std::uint64_t hubs = hub_count(wv, scheme.eps);
                c.below += hubs < static_cast<std::uint64_t>(scheme.k) ? 1 : 0;
                c.off += hubs != static_cast<std::uint64_t>(scheme.k) ? 1 : 0;
            }
            return c;
        });
    detail::remainder_counts rem;
    for (const auto& c : sub) {
        rem.below += c.below;
        rem.off += c.off;
    }

    const double trials = static_cast<double>(cfg.trials);
    const double frac = static_cast<double>(main.edge) / trials;
    const double planted_p = scheme.weight * frac;
    const double planted_se = scheme.weight * std::sqrt(frac * (1.0 - frac) / trials);
    const double below_p = static_cast<double>(rem.below) / trials;
    const double off_p = static_cast<double>(rem.off) / trials;
    const double off_se = std::sqrt(off_p * (1.0 - off_p) / trials);
    const double mean_frac = static_cast<double>(main.mean) / trials;

    tail_estimate out;
    out.method = "planted";
    out.eps_used = scheme.eps;
    out.k_used = scheme.k;
    out.trials = cfg.trials;
    out.hits_or_ess = static_cast<double>(main.edge);
    out.components["N=k"] = planted_p;
    out.components["N<k"] = below_p;
    out.components["N>k bound"] = scheme.greater_bound;
    out.components["M_n"] = scheme.weight * mean_frac;
    out.components["M_n stderr"] =
        scheme.weight * std::sqrt(mean_frac * (1.0 - mean_frac) / trials);
    if (cfg.include_total) {
        out.p_hat = planted_p + off_p;
        out.std_err = std::hypot(planted_se, off_se);
        out.ci_lo = std::max(0.0, out.p_hat - detail::z95 * out.std_err);
        out.ci_hi = std::min(1.0, out.p_hat + detail::z95 * out.std_err);
    } else {
        out.p_hat = planted_p;
        out.std_err = planted_se;
        std::tie(out.ci_lo, out.ci_hi) =
            detail::proportion_ci95(main.edge, cfg.trials, scheme.weight);
    }
    return out;
}

struct hub_law_sample {
    int k = 0;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double ess = 0.0; // likelihood weights are constant, so ESS equals hits
    bool empty = false;
    std::vector<std::vector<double>> tuples; // ascending k-tuples of weight/n
};

/// Empirical law of the hub weights given the rare event: runs the planted
/// scheme for the pair-statistic target and, on each hit, records the k hub
/// weights scaled by n. The likelihood weight is constant across trials, so
/// the self-normalized weighting reduces to the plain empirical measure and
/// the effective sample size is the hit count.
inline hub_law_sample hub_empirical_law(const weight_distribution& d, std::uint64_t n,
                                        double a, const estimator_config& cfg) {
    const detail::planted_scheme scheme = detail::make_planted_scheme(d, n, a, cfg);
    const double thr = sn_threshold(d.mean(), n, a);

    struct partial {
        std::vector<std::vector<double>> tuples;
    };
    const auto partials = run_batches<partial>(
        cfg.trials, cfg.batch, cfg.workers,
        [&](std::uint64_t, std::uint64_t first, std::uint64_t last) {
            partial out;
            for (std::uint64_t t = first; t < last; ++t) {
                random_stream rng(cfg.seed, t, stream_purpose::planted);
                const weight_vector wv = detail::planted_weights(d, n, scheme, rng);
                if (!(s_n(wv) > thr)) continue;
                // The planted coordinates are the first k and dominate the
                // bulk (which is capped at eps*n), so they are the top-k.
                std::vector<double> tuple(wv.w.begin(), wv.w.begin() + scheme.k);
                for (double& x : tuple) x /= static_cast<double>(n);
                std::sort(tuple.begin(), tuple.end());
                out.tuples.push_back(std::move(tuple));
            }
            return out;
        });

    hub_law_sample out;
    out.k = scheme.k;
    out.trials = cfg.trials;
    for (auto& p : partials) {
        for (auto& t : p.tuples) out.tuples.push_back(std::move(t));
    }
    out.hits = out.tuples.size();
    out.ess = static_cast<double>(out.hits);
    out.empty = out.hits == 0;
    return out;
}

/// Rejection sampler for the limiting hub law: k i.i.d. draws from the pure
/// power law at level eta(a), conditioned on C(x_1,...,x_k) >= a. Returns
/// `count` accepted tuples, each sorted ascending.
inline std::vector<std::vector<double>> limit_hub_law_sample(const weight_distribution& d,
                                                             double a, std::uint64_t count,
                                                             std::uint64_t seed,
                                                             std::uint64_t max_attempts = 0) {
    const hubs_info hubs = hubs_required(a, d.mean());
    if (hubs.integer_ratio) {
        throw integer_ratio_error(
            "limiting hub law undefined: a/mu is an integer, where the hub count jumps "
            "(requires non-integer a/mu)");
    }
    const double eta = eta_of(d, a);
    const auto k = static_cast<std::size_t>(hubs.k);
    if (max_attempts == 0) max_attempts = 4096 * count + 4096;

    std::vector<std::vector<double>> accepted;
    accepted.reserve(count);
    std::vector<double> tuple(k);
    for (std::uint64_t attempt = 0; attempt < max_attempts && accepted.size() < count;
         ++attempt) {
        random_stream rng(seed, attempt, stream_purpose::limit_law);
        kahan_sum c;
        for (auto& x : tuple) {
            x = d.sample_conditional(eta, rng);
            c.add(truncated_mean(d, x));
        }
        if (c.value() >= a) {
            std::vector<double> sorted(tuple);
            std::sort(sorted.begin(), sorted.end());
            accepted.push_back(std::move(sorted));
        }
    }
    if (accepted.size() < count) {
        throw computation_error(
            "rejection sampler acceptance is (near) zero; the conditioning event looks "
            "unreachable (it is empty when a > k*mu)");
    }
    return accepted;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_distance(std::vector<double> xs, std::vector<double> ys) {
    if (xs.empty() || ys.empty()) {
        throw std::invalid_argument("ks_distance needs two non-empty samples");
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double nx = static_cast<double>(xs.size());
    const double ny = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double distance = 0.0;
    while (i < xs.size() || j < ys.size()) {
        double v;
        if (i == xs.size()) {
            v = ys[j];
        } else if (j == ys.size()) {
            v = xs[i];
        } else {
            v = std::min(xs[i], ys[j]);
        }
        while (i < xs.size() && xs[i] <= v) ++i;
        while (j < ys.size() && ys[j] <= v) ++j;
        distance = std::max(distance,
                            std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return distance;
}

struct convergence_row {
    std::uint64_t n = 0;
    double p_hat = 0.0;
    double std_err = 0.0;
    double asymptote = 0.0;
    double ratio = 0.0;
    double ratio_err = 0.0;
};

/// Planted estimates across a ladder of n, each divided by the asymptotic
/// curve K(a) (n P(X>n))^k. The ratio column approaching 1 is the empirical
/// convergence check. Distributions without a tail index have no curve:
/// the asymptote degenerates to 0 and the ratio is flagged as NaN.
inline std::vector<convergence_row> convergence_table(const weight_distribution& d, double a,
                                                      const std::vector<std::uint64_t>& n_list,
                                                      const estimator_config& cfg) {
    std::optional<asymptote_params> params;
    if (d.has_tail_index()) {
        params = k_of_a_constant(d, a, cfg.trials, cfg.seed, cfg.workers, cfg.batch);
    }
    std::vector<convergence_row> rows;
    rows.reserve(n_list.size());
    for (const std::uint64_t n : n_list) {
        const tail_estimate est = estimate_sn_tail_planted(d, n, a, cfg);
        convergence_row row;
        row.n = n;
        row.p_hat = est.p_hat;
        row.std_err = est.std_err;
        row.asymptote = params ? sn_asymptote(d, *params, n) : 0.0;
        if (row.asymptote > 0.0) {
            row.ratio = row.p_hat / row.asymptote;
            const double k_rel = params->K_hat > 0.0 ? params->K_stderr / params->K_hat : 0.0;
            row.ratio_err = std::sqrt(std::pow(row.std_err / row.asymptote, 2) +
                                      std::pow(row.ratio * k_rel, 2));
        } else {
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            row.ratio_err = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace hubtail
