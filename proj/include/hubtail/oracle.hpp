#pragma once

#include <hubtail/constants.hpp>
#include <hubtail/errors.hpp>
#include <hubtail/graphstats.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/weights.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hubtail {

inline constexpr std::size_t poisson_binomial_cap = 4096;
inline constexpr std::uint64_t enumeration_budget = 10'000'000;

/// Exact law of a sum of independent Bernoulli(p_i) variables, by O(m^2)
/// convolution. Deliberately the simplest correct method: this class is
/// ground truth for everything else.
class poisson_binomial {
public:
    explicit poisson_binomial(const std::vector<double>& probs) {
        if (probs.size() > poisson_binomial_cap) {
            throw budget_error("poisson binomial DP capped at " +
                               std::to_string(poisson_binomial_cap) + " terms");
        }
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument("bernoulli probabilities must lie in [0,1]");
            }
        }
        pmf_.assign(probs.size() + 1, 0.0);
        pmf_[0] = 1.0;
        std::size_t filled = 0;
        for (const double p : probs) {
            ++filled;
            for (std::size_t j = filled; j-- > 0;) {
                pmf_[j + 1] += pmf_[j] * p;
                pmf_[j] *= 1.0 - p;
            }
        }
    }

    const std::vector<double>& pmf() const { return pmf_; }

    /// P(sum >= t); t may be one past the support, giving 0.
    double tail(std::uint64_t t) const {
        if (t > pmf_.size()) {
            throw std::invalid_argument("tail threshold beyond support");
        }
        if (t == 0) return 1.0; // identically, independent of pmf rounding
        kahan_sum s;
        for (std::size_t j = pmf_.size(); j-- > t;) s.add(pmf_[j]);
        return std::min(1.0, std::max(0.0, s.value()));
    }

private:
    std::vector<double> pmf_;
};

/// Cramer transform of a unit-mean Poisson: (1+b) log(1+b) - b. Governs both
/// deviation directions of Bernoulli sums (use -b for the lower one).
inline double i_b(double b) {
    if (!(b > -1.0)) throw std::domain_error("i_b is defined for b > -1");
    return (1.0 + b) * std::log1p(b) - b;
}

/// exp(-mu_n I_B(b)) bounds P(sum > (1+b) mu_n) for b > 0.
inline double chernoff_upper(double mu_n, double b) {
    if (!(mu_n >= 0.0)) throw std::invalid_argument("chernoff bound needs mu_n >= 0");
    return std::exp(-mu_n * i_b(b));
}

/// exp(-mu_n I_B(-b)) bounds P(sum < (1-b) mu_n) for 0 < b < 1.
inline double chernoff_lower(double mu_n, double b) {
    if (!(mu_n >= 0.0)) throw std::invalid_argument("chernoff bound needs mu_n >= 0");
    return std::exp(-mu_n * i_b(-b));
}

struct bound_check {
    double bound = 0.0;
    double exact = 0.0;
};

/// First-moment bound P(B(n,p) >= m) <= (np)^m next to the exact binomial
/// tail. Dominance is a mathematical identity; a violation here means the
/// DP is broken.
inline bound_check binomial_bound_check(std::uint64_t n, double p, std::uint64_t m) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
    if (m > n) throw std::invalid_argument("m must be at most n");
    bound_check out;
    out.bound = std::pow(static_cast<double>(n) * p, static_cast<double>(m));
    const poisson_binomial pb(std::vector<double>(n, p));
    out.exact = pb.tail(m);
    if (out.exact > out.bound * (1.0 + 1e-12) + 1e-300) {
        throw std::logic_error("binomial tail exceeded its first-moment bound");
    }
    return out;
}

/// E[min{eta X, mu}] evaluated as the integral of P(eta X > t) over [0, mu]
/// by adaptive Simpson with subdivision at the integrand's kinks. Entirely
/// independent of the closed forms it cross-checks.
inline double quadrature_truncated_mean(const weight_distribution& d, double eta,
                                        double abs_tol = 1e-10) {
    if (!(eta >= 0.0)) throw std::domain_error("truncated mean requires eta >= 0");
    const double mu = d.mean();
    if (eta == 0.0) return 0.0;
    const auto f = [&](double t) { return d.tail(t / eta); };

    std::vector<double> cuts{0.0, mu};
    const auto add_cut = [&](double x) {
        if (x > 0.0 && x < mu) cuts.push_back(x);
    };
    if (d.family() == weight_family::grid) {
        for (double v : d.grid_values()) add_cut(eta * v);
    } else {
        add_cut(eta * d.lower_endpoint());
    }
    std::sort(cuts.begin(), cuts.end());

    std::function<double(double, double, double, double, double, double, int)> simpson =
        [&](double lo, double hi, double flo, double fmid, double fhi, double tol,
            int depth) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lmid = 0.5 * (lo + mid);
        const double rmid = 0.5 * (mid + hi);
        const double flmid = f(lmid);
        const double frmid = f(rmid);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
        const double split = left + right;
        if (depth > 48 || std::abs(split - whole) <= 15.0 * tol) {
            return split + (split - whole) / 15.0;
        }
        return simpson(lo, mid, flo, flmid, fmid, 0.5 * tol, depth + 1) +
               simpson(mid, hi, fmid, frmid, fhi, 0.5 * tol, depth + 1);
    };

    kahan_sum total;
    const double seg_tol = abs_tol / static_cast<double>(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        // Open evaluation just inside the segment keeps jump points off the
        // sample grid, so step integrands integrate exactly.
        const double nudge = (hi - lo) * 1e-12;
        total.add(simpson(lo + nudge, hi - nudge, f(lo + nudge), f(0.5 * (lo + hi)),
                          f(hi - nudge), seg_tol, 0));
    }
    return total.value();
}

namespace detail {

/// Visits every n-tuple over the grid's atoms in lexicographic order,
/// calling visit(weights, probability). Probability products are rebuilt
/// incrementally along the odometer.
template <class Visit>
void enumerate_grid_tuples(const weight_distribution& d, std::uint64_t n, Visit&& visit) {
    const auto& values = d.grid_values();
    const auto& probs = d.grid_probs();
    const std::size_t base = values.size();
    double combos = 1.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        combos *= static_cast<double>(base);
        if (combos > static_cast<double>(enumeration_budget)) {
            throw budget_error("grid enumeration budget exceeded: |values|^n > " +
                               std::to_string(enumeration_budget));
        }
    }
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> w(n, values[0]);
    std::vector<double> pref(n + 1, 1.0); // pref[i] = prod of probs of slots < i
    for (std::uint64_t i = 0; i < n; ++i) pref[i + 1] = pref[i] * probs[0];
    while (true) {
        visit(w, pref[n]);
        std::size_t slot = n;
        while (slot-- > 0) {
            if (++idx[slot] < base) break;
            idx[slot] = 0;
        }
        if (slot == static_cast<std::size_t>(-1)) break;
        for (std::size_t i = slot; i < n; ++i) {
            w[i] = values[idx[i]];
            pref[i + 1] = pref[i] * probs[idx[i]];
        }
    }
}

/// O(n^2) reference pair statistic; the fast production path is tested
/// against this.
inline double brute_force_s_n(const std::vector<double>& w, double mun) {
    kahan_sum s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            s.add(std::min(w[i] * w[j], mun));
        }
    }
    return s.value();
}

} // namespace detail

/// Exact P(S_n > threshold) for a grid law by full enumeration.
inline double exact_sn_tail_grid(const weight_distribution& d, std::uint64_t n,
                                 double threshold) {
    const double mun = d.mean() * static_cast<double>(n);
    kahan_sum p;
    detail::enumerate_grid_tuples(d, n, [&](const std::vector<double>& w, double prob) {
        if (detail::brute_force_s_n(w, mun) > threshold) p.add(prob);
    });
    return std::min(1.0, std::max(0.0, p.value()));
}

/// Exact P(S_n > threshold, #{i: w_i > eps n} = hubs): the quantity the
/// planted scheme estimates; used to pin its unbiasedness on tiny cases.
inline double exact_sn_tail_grid(const weight_distribution& d, std::uint64_t n,
                                 double threshold, double eps, std::uint64_t hubs) {
    const double mun = d.mean() * static_cast<double>(n);
    const double cut = eps * static_cast<double>(n);
    kahan_sum p;
    detail::enumerate_grid_tuples(d, n, [&](const std::vector<double>& w, double prob) {
        std::uint64_t above = 0;
        for (double x : w) above += x > cut ? 1 : 0;
        if (above == hubs && detail::brute_force_s_n(w, mun) > threshold) p.add(prob);
    });
    return std::min(1.0, std::max(0.0, p.value()));
}

/// Exact P(E_n > t) for a grid law: enumerate weight tuples, then take the
/// Poisson-binomial tail of the pair probabilities under each tuple.
inline double exact_en_tail_small(const weight_distribution& d, std::uint64_t n,
                                  std::int64_t t) {
    if (n * (n - 1) / 2 > 66) {
        throw budget_error("exact edge-count law kept to n(n-1)/2 <= 66 pairs");
    }
    const double mun = d.mean() * static_cast<double>(n);
    const std::uint64_t pairs = n * (n - 1) / 2;
    // Thresholds at or past the pair count have an empty upper tail.
    const auto want = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(std::max<std::int64_t>(t + 1, 0)), pairs + 1);
    kahan_sum acc;
    std::vector<double> pair_probs;
    detail::enumerate_grid_tuples(d, n, [&](const std::vector<double>& w, double prob) {
        pair_probs.clear();
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            for (std::size_t j = i + 1; j < w.size(); ++j) {
                pair_probs.push_back(std::min(w[i] * w[j] / mun, 1.0));
            }
        }
        acc.add(prob * poisson_binomial(pair_probs).tail(want));
    });
    return std::min(1.0, std::max(0.0, acc.value()));
}

struct check_result {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Self-verification suite behind `oracle --check all`: dominance of the
/// closed-form bounds over exact tails, DP sanity, reduction identities,
/// and fast-path equivalences. Everything is deterministic.
inline std::vector<check_result> run_all_checks() {
    std::vector<check_result> results;
    const auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        results.push_back({name, ok, detail});
    };

    {
        bool ok = true;
        std::string detail = "pmf sums to 1 and tails decrease";
        for (std::uint64_t inst = 0; inst < 100 && ok; ++inst) {
            random_stream rng(1234, inst);
            const auto m = static_cast<std::size_t>(1 + (rng.next_u64() % 200));
            std::vector<double> probs(m);
            for (auto& p : probs) p = rng.uniform_co();
            const poisson_binomial pb(probs);
            kahan_sum total;
            for (double v : pb.pmf()) total.add(v);
            if (std::abs(total.value() - 1.0) > 1e-12) {
                ok = false;
                detail = "pmf mass off by " + format_double(total.value() - 1.0);
            }
            for (std::size_t t = 1; t <= m && ok; ++t) {
                if (pb.tail(t) > pb.tail(t - 1) + 1e-15) {
                    ok = false;
                    detail = "tail increased at t=" + std::to_string(t);
                }
            }
        }
        record("poisson_binomial_mass_and_monotonicity", ok, detail);
    }

    {
        bool ok = true;
        std::string detail = "reversal leaves the pmf unchanged";
        for (std::uint64_t inst = 0; inst < 50 && ok; ++inst) {
            random_stream rng(99, inst);
            const auto m = static_cast<std::size_t>(2 + (rng.next_u64() % 64));
            std::vector<double> probs(m);
            for (auto& p : probs) p = rng.uniform_co();
            std::vector<double> reversed(probs.rbegin(), probs.rend());
            const auto a = poisson_binomial(probs).pmf();
            const auto b = poisson_binomial(reversed).pmf();
            for (std::size_t j = 0; j < a.size(); ++j) {
                if (std::abs(a[j] - b[j]) > 1e-13) {
                    ok = false;
                    detail = "pmf changed under permutation at j=" + std::to_string(j);
                    break;
                }
            }
        }
        record("poisson_binomial_permutation_invariance", ok, detail);
    }

    {
        bool ok = true;
        std::string detail = "both deviation bounds dominate exact tails";
        for (std::uint64_t inst = 0; inst < 200 && ok; ++inst) {
            random_stream rng(777, inst);
            const auto m = static_cast<std::size_t>(1 + (rng.next_u64() % 100));
            std::vector<double> probs(m);
            double mu_n = 0.0;
            for (auto& p : probs) {
                p = rng.uniform_co();
                mu_n += p;
            }
            const poisson_binomial pb(probs);
            for (const double b : {0.1, 0.5, 1.0}) {
                const double upper_point = (1.0 + b) * mu_n;
                const auto t = static_cast<std::uint64_t>(
                    std::min(std::floor(upper_point) + 1.0, static_cast<double>(m + 1)));
                if (pb.tail(t) > chernoff_upper(mu_n, b) + 1e-12) {
                    ok = false;
                    detail = "upper bound violated at b=" + format_double(b);
                    break;
                }
                if (b < 1.0) {
                    const double lower_point = (1.0 - b) * mu_n;
                    const auto lt = static_cast<std::uint64_t>(
                        std::max(std::ceil(lower_point), 0.0));
                    const double exact_below = 1.0 - pb.tail(std::min<std::uint64_t>(lt, m + 1));
                    if (exact_below > chernoff_lower(mu_n, b) + 1e-12) {
                        ok = false;
                        detail = "lower bound violated at b=" + format_double(b);
                        break;
                    }
                }
            }
        }
        record("chernoff_dominance", ok, detail);
    }

    {
        bool ok = true;
        std::string detail = "(np)^m dominates the exact binomial tail";
        for (std::uint64_t inst = 0; inst < 200 && ok; ++inst) {
            random_stream rng(555, inst);
            const std::uint64_t n = 1 + (rng.next_u64() % 150);
            const double p = rng.uniform_co();
            const std::uint64_t m = rng.next_u64() % (n + 1);
            try {
                binomial_bound_check(n, p, m);
            } catch (const std::logic_error&) {
                ok = false;
                detail = "dominance failed at n=" + std::to_string(n);
            }
        }
        record("binomial_first_moment_dominance", ok, detail);
    }

    {
        // All weights equal makes every pair probability identical, so the
        // edge count is a pure binomial.
        const auto d = weight_distribution::grid({1.5}, {1.0});
        const std::uint64_t n = 5;
        const double pair_p = 1.5 * 1.5 / (d.mean() * static_cast<double>(n));
        const poisson_binomial binom(std::vector<double>(10, pair_p));
        bool ok = true;
        std::string detail = "edge law reduces to a binomial for equal weights";
        for (std::int64_t t = -1; t <= 10; ++t) {
            const double exact = exact_en_tail_small(d, n, t);
            const double reference = binom.tail(static_cast<std::uint64_t>(t + 1));
            if (std::abs(exact - reference) > 1e-12) {
                ok = false;
                detail = "mismatch at t=" + std::to_string(t);
                break;
            }
        }
        record("edge_law_binomial_reduction", ok, detail);
    }

    {
        bool ok = true;
        std::string detail = "fast pair statistic equals the quadratic reference";
        const auto pareto = weight_distribution::pareto(2.0, 1.0);
        for (std::uint64_t inst = 0; inst < 200 && ok; ++inst) {
            random_stream rng(31337, inst);
            const std::uint64_t n = 2 + (rng.next_u64() % 127);
            const auto wv = sample_weights(pareto, n, rng);
            const double fast = s_n(wv);
            const double brute = detail::brute_force_s_n(wv.w, wv.mu * static_cast<double>(n));
            const double scale = std::max(1.0, std::abs(brute));
            if (std::abs(fast - brute) > 1e-9 * scale) {
                ok = false;
                detail = "mismatch " + format_double(fast - brute) + " at n=" + std::to_string(n);
            }
        }
        record("pair_statistic_fast_path", ok, detail);
    }

    {
        bool ok = true;
        std::string detail = "closed-form truncated mean matches quadrature";
        const std::vector<weight_distribution> dists = {
            weight_distribution::pareto(2.0, 1.0),
            weight_distribution::pareto(3.0, 2.0),
            weight_distribution::grid({0.5, 1.0, 4.0}, {0.25, 0.5, 0.25}),
        };
        for (const auto& d : dists) {
            for (double eta = 1e-3; eta <= 1e3 && ok; eta *= 10.0) {
                const double closed = truncated_mean(d, eta);
                const double quad = quadrature_truncated_mean(d, eta);
                if (std::abs(closed - quad) > 1e-9) {
                    ok = false;
                    detail = "gap " + format_double(closed - quad) + " at eta=" + format_double(eta);
                }
            }
        }
        record("truncated_mean_quadrature_agreement", ok, detail);
    }

    return results;
}

} // namespace hubtail
