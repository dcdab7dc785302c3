#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace hgt {

// Shared absolute/relative tolerance for deciding exact-arithmetic facts
// (integer membership, exponent ties) from floating-point values.
inline constexpr double kTol = 1e-9;

inline bool nearly_equal(double a, double b, double tol = kTol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool is_integer(double x, double tol = kTol) {
    return std::abs(x - std::round(x)) <= tol * std::max(1.0, std::abs(x));
}

// In {0, 1, 2, ...} up to tolerance.
inline bool is_natural(double x, double tol = kTol) {
    return is_integer(x, tol) && std::round(x) >= 0.0;
}

// floor(x) that snaps values within tolerance of an integer to that integer,
// so e.g. floor(4/0.1) is 40 even though 4/0.1 rounds below 40.
inline long long floor_snap(double x, double tol = kTol) {
    if (is_integer(x, tol)) return static_cast<long long>(std::llround(x));
    return static_cast<long long>(std::floor(x));
}

inline long long ceil_snap(double x, double tol = kTol) {
    if (is_integer(x, tol)) return static_cast<long long>(std::llround(x));
    return static_cast<long long>(std::ceil(x));
}

// (e^x - 1) / x with the removable singularity filled in.
inline double expm1_over(double x) {
    if (std::abs(x) < 1e-12) return 1.0 + 0.5 * x;
    return std::expm1(x) / x;
}

// (e^x - 1 - x) / x^2; the direct form loses precision below |x| ~ 1e-4.
inline double expm1m_over_sq(double x) {
    if (std::abs(x) < 1e-4) return 0.5 + x / 6.0 + x * x / 24.0;
    return (std::expm1(x) - x) / (x * x);
}

// divided difference of expm1_over between x0 and x1; falls back to the
// derivative at the midpoint when the gap is too narrow to difference
inline double expm1_over_diff(double x0, double x1) {
    if (std::abs(x1 - x0) < 1e-5) {
        const double m = 0.5 * (x0 + x1);
        if (std::abs(m) < 1e-3) return 0.5 + m / 3.0 + m * m / 8.0 + m * m * m / 30.0;
        return (std::exp(m) * (m - 1.0) + 1.0) / (m * m);
    }
    return (expm1_over(x1) - expm1_over(x0)) / (x1 - x0);
}

}  // namespace hgt
