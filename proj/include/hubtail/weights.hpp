#pragma once

#include <hubtail/errors.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/rng.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace hubtail {

enum class weight_family { pareto, grid };

/// Law of the i.i.d. vertex weights. Two families:
///  - pareto: P(X > x) = (xmin/x)^alpha for x >= xmin, alpha > 1 so the mean
///    is finite. This is the regularly-varying family the asymptotic
///    constants are defined for.
///  - grid: finite support on sorted distinct non-negative atoms. Carries no
///    tail index; it exists to feed exhaustive enumeration oracles and is
///    rejected by every operation that needs alpha.
class weight_distribution {
public:
    static weight_distribution pareto(double alpha, double xmin) {
        if (!(alpha > 1.0)) {
            throw std::invalid_argument("pareto weights require alpha > 1 (finite mean)");
        }
        if (!(xmin > 0.0)) {
            throw std::invalid_argument("pareto weights require xmin > 0");
        }
        weight_distribution d;
        d.family_ = weight_family::pareto;
        d.alpha_ = alpha;
        d.xmin_ = xmin;
        d.mean_ = alpha * xmin / (alpha - 1.0);
        d.neg_inv_alpha_ = -1.0 / alpha;
        return d;
    }

    static weight_distribution grid(std::vector<double> values, std::vector<double> probs) {
        if (values.empty() || values.size() != probs.size()) {
            throw std::invalid_argument("grid weights require equally many values and probs");
        }
        kahan_sum total;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] >= 0.0)) {
                throw std::invalid_argument("grid values must be non-negative");
            }
            if (i > 0 && !(values[i] > values[i - 1])) {
                throw std::invalid_argument("grid values must be sorted ascending and distinct");
            }
            if (!(probs[i] >= 0.0)) {
                throw std::invalid_argument("grid probs must be non-negative");
            }
            total.add(probs[i]);
        }
        if (std::abs(total.value() - 1.0) > 1e-12) {
            throw std::invalid_argument("grid probs must sum to 1 within 1e-12");
        }
        weight_distribution d;
        d.family_ = weight_family::grid;
        d.values_ = std::move(values);
        d.probs_ = std::move(probs);
        // Renormalize exactly so downstream enumeration sums to 1.
        for (double& p : d.probs_) p /= total.value();
        d.cum_.resize(d.probs_.size());
        kahan_sum c;
        kahan_sum m;
        for (std::size_t i = 0; i < d.probs_.size(); ++i) {
            c.add(d.probs_[i]);
            m.add(d.probs_[i] * d.values_[i]);
            d.cum_[i] = std::min(c.value(), 1.0);
        }
        d.cum_.back() = 1.0;
        d.mean_ = m.value();
        if (!(d.mean_ > 0.0)) {
            throw std::invalid_argument("grid weights require strictly positive mean");
        }
        return d;
    }

    /// Accepts "pareto:alpha=2,xmin=1" or "grid:values=0,1,3;probs=0.25,0.5,0.25".
    static weight_distribution parse(const std::string& text) {
        std::string s;
        s.reserve(text.size());
        for (char ch : text) {
            if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
        }
        const auto colon = s.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("weight spec must look like family:key=value,...");
        }
        const std::string fam = s.substr(0, colon);
        const std::string rest = s.substr(colon + 1);
        if (fam == "pareto") {
            double alpha = 0.0, xmin = 0.0;
            bool has_alpha = false, has_xmin = false;
            for (const auto& field : split(rest, ',')) {
                const auto [key, value] = key_value(field);
                if (key == "alpha" && !has_alpha) {
                    alpha = parse_double(value);
                    has_alpha = true;
                } else if (key == "xmin" && !has_xmin) {
                    xmin = parse_double(value);
                    has_xmin = true;
                } else {
                    throw std::invalid_argument("pareto spec takes alpha=..,xmin=.. once each; got '" + field + "'");
                }
            }
            if (!has_alpha || !has_xmin) {
                throw std::invalid_argument("pareto spec needs both alpha and xmin");
            }
            return pareto(alpha, xmin);
        }
        if (fam == "grid") {
            std::vector<double> values, probs;
            bool has_values = false, has_probs = false;
            for (const auto& section : split(rest, ';')) {
                const auto [key, value] = key_value(section);
                auto& target = key == "values" ? values : probs;
                bool& seen = key == "values" ? has_values : has_probs;
                if ((key != "values" && key != "probs") || seen) {
                    throw std::invalid_argument("grid spec takes values=..;probs=.. once each; got '" + section + "'");
                }
                for (const auto& item : split(value, ',')) target.push_back(parse_double(item));
                seen = true;
            }
            if (!has_values || !has_probs) {
                throw std::invalid_argument("grid spec needs both values and probs");
            }
            return grid(std::move(values), std::move(probs));
        }
        throw std::invalid_argument("unknown weight family '" + fam + "' (want pareto or grid)");
    }

    weight_family family() const { return family_; }
    bool has_tail_index() const { return family_ == weight_family::pareto; }

    double tail_index() const {
        require_tail_index();
        return alpha_;
    }

    double mean() const { return mean_; }

    /// Infimum of the support: xmin, or the smallest atom with positive
    /// probability.
    double lower_endpoint() const {
        if (family_ == weight_family::pareto) return xmin_;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (probs_[i] > 0.0) return values_[i];
        }
        return 0.0;
    }

    /// P(X > x), exact.
    double tail(double x) const {
        if (!(x >= 0.0)) throw std::invalid_argument("tail requires x >= 0");
        if (family_ == weight_family::pareto) {
            return x <= xmin_ ? 1.0 : std::pow(xmin_ / x, alpha_);
        }
        kahan_sum s;
        for (std::size_t i = values_.size(); i-- > 0;) {
            if (values_[i] > x) s.add(probs_[i]);
            else break;
        }
        return std::min(s.value(), 1.0);
    }

    double sample(random_stream& rng) const {
        if (family_ == weight_family::pareto) return pareto_quantile(xmin_, rng.uniform_unit());
        return grid_quantile(rng.uniform_unit());
    }

    /// Draw from the pure power law with tail (x/b)^{-alpha} on [b, inf).
    /// This is the rescaled limit law of a conditioned hub weight, defined
    /// through alpha alone; for a pareto d with b >= xmin it coincides with
    /// the exact law of X given X > b.
    double sample_conditional(double b, random_stream& rng) const {
        require_tail_index();
        if (!(b > 0.0)) throw std::invalid_argument("sample_conditional requires b > 0");
        return pareto_quantile(b, rng.uniform_unit());
    }

    /// Exact law of X given X > b. Unlike sample_conditional this respects
    /// the actual distribution, which is what makes planted-hub likelihood
    /// ratios exact at finite n.
    double sample_given_above(double b, random_stream& rng) const {
        if (family_ == weight_family::pareto) {
            if (b <= xmin_) return sample(rng);
            return pareto_quantile(b, rng.uniform_unit());
        }
        const auto first = static_cast<std::size_t>(
            std::upper_bound(values_.begin(), values_.end(), b) - values_.begin());
        return grid_range_quantile(first, values_.size(), rng.uniform_unit());
    }

    /// Exact law of X given X <= b.
    double sample_given_at_most(double b, random_stream& rng) const {
        if (family_ == weight_family::pareto) {
            const double mass = 1.0 - tail(b);
            if (mass <= 0.0) {
                throw std::invalid_argument("no probability mass at or below conditioning point");
            }
            // Inverse CDF of the restriction: u on (0,1] maps onto (xmin, b].
            return pareto_quantile(xmin_, 1.0 - mass * rng.uniform_unit());
        }
        const auto end = static_cast<std::size_t>(
            std::upper_bound(values_.begin(), values_.end(), b) - values_.begin());
        return grid_range_quantile(0, end, rng.uniform_unit());
    }

    const std::vector<double>& grid_values() const {
        require_grid();
        return values_;
    }

    const std::vector<double>& grid_probs() const {
        require_grid();
        return probs_;
    }

    std::string canonical() const {
        if (family_ == weight_family::pareto) {
            return "pareto:alpha=" + format_double(alpha_) + ",xmin=" + format_double(xmin_);
        }
        std::string out = "grid:values=";
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (i) out += ',';
            out += format_double(values_[i]);
        }
        out += ";probs=";
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (i) out += ',';
            out += format_double(probs_[i]);
        }
        return out;
    }

private:
    weight_distribution() = default;

    void require_tail_index() const {
        if (family_ != weight_family::pareto) {
            throw unsupported_error("operation needs a tail index alpha; grid distributions have none");
        }
    }

    void require_grid() const {
        if (family_ != weight_family::grid) {
            throw unsupported_error("operation enumerates atoms; only grid distributions have them");
        }
    }

    double pareto_quantile(double scale, double u) const {
        // u in (0,1]; u=1 hits the lower endpoint exactly.
        if (alpha_ == 2.0) return scale / std::sqrt(u);
        return scale * std::pow(u, neg_inv_alpha_);
    }

    double grid_quantile(double u) const {
        // Smallest atom whose cumulative probability covers u in (0,1].
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        const auto idx = static_cast<std::size_t>(it - cum_.begin());
        return values_[std::min(idx, values_.size() - 1)];
    }

    // Renormalized inverse CDF over atoms [first, end). The mass is summed
    // in the same order as the selection walk, so the walk always lands.
    double grid_range_quantile(std::size_t first, std::size_t end, double u) const {
        double mass = 0.0;
        for (std::size_t i = first; i < end; ++i) mass += probs_[i];
        if (mass <= 0.0) {
            throw std::invalid_argument("no probability mass in conditioning range");
        }
        const double target = u * mass;
        double c = 0.0;
        std::size_t last = first;
        for (std::size_t i = first; i < end; ++i) {
            if (probs_[i] <= 0.0) continue;
            last = i;
            c += probs_[i];
            if (c >= target) return values_[i];
        }
        return values_[last];
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto end = s.find(sep, start);
            if (end == std::string::npos) {
                out.push_back(s.substr(start));
                break;
            }
            out.push_back(s.substr(start, end - start));
            start = end + 1;
        }
        return out;
    }

    static std::pair<std::string, std::string> key_value(const std::string& field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("expected key=value, got '" + field + "'");
        }
        return {field.substr(0, eq), field.substr(eq + 1)};
    }

    static double parse_double(const std::string& text) {
        if (text.empty()) throw std::invalid_argument("empty number in weight spec");
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || !std::isfinite(v)) {
            throw std::invalid_argument("bad number '" + text + "' in weight spec");
        }
        return v;
    }

    weight_family family_ = weight_family::pareto;
    double alpha_ = 2.0;
    double xmin_ = 1.0;
    double mean_ = 2.0;
    double neg_inv_alpha_ = -0.5;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cum_;
};

} // namespace hubtail
