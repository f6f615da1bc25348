#pragma once

#include <hubtail/errors.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/rng.hpp>
#include <hubtail/weights.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hubtail {

inline constexpr std::uint64_t edge_sampling_cap = 8192;

/// One realization of the weight sequence, with the model mean baked in at
/// sampling time (the mean of the generating law, not of the sample).
struct weight_vector {
    std::uint64_t n = 0;
    std::vector<double> w;
    double mu = 0.0;
};

inline weight_vector sample_weights(const weight_distribution& d, std::uint64_t n,
                                    random_stream& rng) {
    if (n < 1) throw std::invalid_argument("sample_weights needs n >= 1");
    weight_vector wv;
    wv.n = n;
    wv.mu = d.mean();
    wv.w.resize(n);
    for (auto& x : wv.w) x = d.sample(rng);
    return wv;
}

/// Pair statistic sum over i<j of min{w_i w_j, mu n}, exact in O(n log n).
/// Split at T = sqrt(mu n): a pair with both entries <= T has product <= mu n,
/// so only pairs with the larger entry above T can be capped. Those are
/// corrected off the uncapped closed form via a two-pointer sweep of the
/// sorted weights.
inline double s_n(const weight_vector& wv) {
    const double mun = wv.mu * static_cast<double>(wv.n);
    if (!(mun > 0.0)) throw std::invalid_argument("weight vector needs mu > 0");
    kahan_sum sum_w, sum_w2;
    for (double x : wv.w) {
        sum_w.add(x);
        sum_w2.add(x * x);
    }
    const double uncapped = 0.5 * (sum_w.value() * sum_w.value() - sum_w2.value());

    const double t_split = std::sqrt(mun);
    std::vector<double> v(wv.w);
    std::sort(v.begin(), v.end());
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];

    kahan_sum correction;
    std::size_t lo = 0;
    for (std::size_t i = v.size(); i-- > 0;) {
        if (!(v[i] > t_split)) break; // partners of smaller entries are never capped
        // Partners j < i with v[j] * v[i] > mu n. The cutoff mun / v[i] grows
        // as i descends, so lo only moves right.
        const double cutoff = mun / v[i];
        while (lo < i && !(v[lo] > cutoff)) ++lo;
        if (lo >= i) continue;
        const auto count = static_cast<double>(i - lo);
        correction.add(v[i] * (prefix[i] - prefix[lo]) - mun * count);
    }
    return uncapped - correction.value();
}

/// M_n = S_n / (mu n), the conditional mean of the edge count given weights.
inline double m_n(const weight_vector& wv) {
    return s_n(wv) / (wv.mu * static_cast<double>(wv.n));
}

/// Samples the edge count: each pair i<j is an independent Bernoulli with
/// probability min{w_i w_j / (mu n), 1}. One uniform per pair; u <= p with
/// u in (0,1] realizes p = 0 and p = 1 exactly.
inline std::uint64_t sample_edge_count(const weight_vector& wv, random_stream& rng,
                                       std::uint64_t cap = edge_sampling_cap) {
    if (wv.n > cap) {
        throw budget_error("edge sampling walks all n(n-1)/2 pairs; n exceeds the cap of " +
                           std::to_string(cap) +
                           " - use the pair-statistic (conditional mean) estimators instead");
    }
    const double inv_mun = 1.0 / (wv.mu * static_cast<double>(wv.n));
    std::uint64_t edges = 0;
    const std::size_t n = wv.w.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double wi = wv.w[i] * inv_mun;
        for (std::size_t j = i + 1; j < n; ++j) {
            edges += rng.uniform_unit() <= wi * wv.w[j] ? 1 : 0;
        }
    }
    return edges;
}

/// Number of weights strictly above eps*n.
inline std::uint64_t hub_count(const weight_vector& wv, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("hub_count needs eps > 0");
    const double threshold = eps * static_cast<double>(wv.n);
    std::uint64_t count = 0;
    for (double x : wv.w) count += x > threshold ? 1 : 0;
    return count;
}

/// Centered, scaled edge count E_n/n - mu/2; the quantity whose upper tail
/// the rate function governs.
inline double centered_edges(std::uint64_t edges, std::uint64_t n, double mu) {
    if (n < 1) throw std::invalid_argument("centered_edges needs n >= 1");
    return static_cast<double>(edges) / static_cast<double>(n) - 0.5 * mu;
}

/// Per-realization statistics bundle for one simulated instance.
struct graph_summary {
    std::uint64_t n = 0;
    double s_n = 0.0;
    double m_n = 0.0;
    std::optional<std::uint64_t> e_n; // absent above the edge-sampling cap
    std::uint64_t n_eps = 0;
    double eps = 0.0;
    std::vector<double> top_weights; // largest entries of w/n, descending, up to 2
};

inline graph_summary summarize(const weight_vector& wv, double eps, random_stream& edge_rng,
                               bool with_edges = true) {
    graph_summary g;
    g.n = wv.n;
    g.s_n = s_n(wv);
    g.m_n = g.s_n / (wv.mu * static_cast<double>(wv.n));
    g.eps = eps;
    g.n_eps = hub_count(wv, eps);
    if (with_edges && wv.n <= edge_sampling_cap) g.e_n = sample_edge_count(wv, edge_rng);
    const std::size_t top = std::min<std::size_t>(2, wv.w.size());
    std::vector<double> scaled(wv.w);
    std::partial_sort(scaled.begin(), scaled.begin() + static_cast<std::ptrdiff_t>(top),
                      scaled.end(), std::greater<>());
    for (std::size_t i = 0; i < top; ++i) {
        g.top_weights.push_back(scaled[i] / static_cast<double>(wv.n));
    }
    return g;
}

} // namespace hubtail
