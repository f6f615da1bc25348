#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace hubtail {

/// Neumaier-compensated accumulator. Used wherever a sum over many terms
/// feeds a tolerance-sensitive comparison.
class kahan_sum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Shortest decimal string that parses back to exactly x. Keeps emitted
/// CSV/JSON byte-stable without dumping 17 digits for round values.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

} // namespace hubtail
