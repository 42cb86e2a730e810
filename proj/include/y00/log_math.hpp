#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace y00 {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

/// log C(n, k). Exact-term summation for small min(k, n-k), log-gamma otherwise.
inline double log_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return kNegInf;
    const std::int64_t j = std::min(k, n - k);
    if (j < 64) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < j; ++i)
            acc += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
        return acc;
    }
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace y00
