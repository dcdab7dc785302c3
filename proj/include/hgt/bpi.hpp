#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hgt/numeric.hpp"
#include "hgt/rng.hpp"

namespace hgt {

// Linear birth-death process with immigration at rate K^c * e^(a*s): exact
// first and second moments, log-scale limit exponents, the survival law of
// the plain branching process, and an exact jump simulator. These are the
// small-population building blocks the full model is compared against.

// Branch selection threshold for the removable singularities (r=a, r=0,
// a=2r). The closed forms below are evaluated through expm1, so values on
// both sides of a switch agree to near machine precision.
inline constexpr double kBranchTol = 1e-9;

struct BPIParams {
    double b = 0.0;     // individual birth rate
    double d = 0.0;     // individual death rate
    double a = 0.0;     // immigration growth exponent
    double c = 0.0;     // immigration scale exponent
    double beta = 0.0;  // initial block of floor(K^beta - 1) individuals
    std::int64_t K = 2;
    bool immigration = true;  // false: no immigration term at all

    double r() const { return b - d; }
    double init_mass() const {
        return std::pow(static_cast<double>(K), beta) - 1.0;
    }
    std::int64_t init_count() const {
        return static_cast<std::int64_t>(floor_snap(init_mass()));
    }
    double imm_scale() const {
        return immigration ? std::pow(static_cast<double>(K), c) : 0.0;
    }

    void validate() const {
        if (!(b >= 0.0) || !(d >= 0.0))
            throw std::invalid_argument("rates must be nonnegative");
        if (!(beta >= 0.0))
            throw std::invalid_argument("beta must be nonnegative");
        if (!std::isfinite(a) || !std::isfinite(c))
            throw std::invalid_argument("immigration exponents must be finite");
        if (K < 2) throw std::invalid_argument("scale needs K >= 2");
    }
};

// E[Z_t] = (K^beta - 1 + K^c/(r-a)) e^(rt) - K^c e^(at)/(r-a) for r != a,
// e^(rt)(K^beta - 1 + K^c t) for r = a. The stable form below is the same
// expression with the difference quotient taken through expm1.
inline double bpi_mean(const BPIParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    const double r = p.r(), n0 = p.init_mass(), gc = p.imm_scale();
    if (std::abs(r - p.a) < kBranchTol)
        return std::exp(r * t) * (n0 + gc * t);
    return n0 * std::exp(r * t) +
           gc * t * std::exp(p.a * t) * expm1_over((r - p.a) * t);
}

// Var[Z_t], all three branches of the moment computation. In the r != a
// branch the factor (e^(at) - e^(2rt))/(a - 2r) tends to t*e^(2rt) as
// a -> 2r (the expm1 form below takes that limit by itself).
inline double bpi_variance(const BPIParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    const double r = p.r(), a = p.a, bd = p.b + p.d;
    const double n0 = p.init_mass(), gc = p.imm_scale();
    double v;
    if (std::abs(r - a) >= kBranchTol) {
        // phi1 = (e^(2rt) - e^(rt))/r, phi2 = (e^(at) - e^(2rt))/(a - 2r);
        // grouping the cross term as psi = (phi1 - phi2)/(r - a), a divided
        // difference, keeps it finite and smooth as a approaches r
        const double phi1 = t * std::exp(r * t) * expm1_over(r * t);
        const double phi2 = t * std::exp(2.0 * r * t) * expm1_over((a - 2.0 * r) * t);
        const double psi = t * t * std::exp(2.0 * r * t) *
                           expm1_over_diff((a - 2.0 * r) * t, -r * t);
        v = bd * n0 * phi1 + gc * phi2 + bd * gc * psi;
    } else if (std::abs(r) >= kBranchTol) {
        const double phi1 = t * std::exp(r * t) * expm1_over(r * t);
        // (e^(2rt) - e^(rt) - r t e^(rt))/r^2
        const double phi3 = t * t * std::exp(r * t) * expm1m_over_sq(r * t);
        v = (bd * n0 + gc) * phi1 + bd * gc * phi3;
    } else {  // r = a = 0, so b = d
        v = (gc + 2.0 * p.b * n0) * t + p.b * gc * t * t;
    }
    return std::max(0.0, v);
}

// Limit of log(1 + Z_{t log K})/log K as K -> infinity, in log-K time.
// Requires c <= beta and (beta > 0 or c != 0); the strong-immigration side
// c > beta and the degenerate corner beta = c = 0 are out of scope.
inline double bpi_limit_exponent(const BPIParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    const double r = p.r();
    if (!p.immigration) {
        if (p.beta <= 0.0)
            throw std::domain_error(
                "out of scope: empty process (beta = 0, no immigration)");
        return std::max(p.beta + r * t, 0.0);
    }
    if (p.c > p.beta)
        throw std::domain_error("out of scope: requires c <= beta");
    if (p.beta == 0.0 && p.c == 0.0)
        throw std::domain_error("out of scope: beta = c = 0 is excluded");
    if (p.beta > 0.0)
        return std::max({p.beta + r * t, p.c + p.a * t, 0.0});
    if (p.a > 0.0)  // beta = 0, c < 0: silent until t = |c|/a
        return std::max(std::max(r, p.a) * (t + p.c / p.a), 0.0);
    return 0.0;
}

// P(extinction time > t) for one ancestor: r e^(rt)/(b e^(rt) - d), written
// as r/(b - d e^(-rt)) so large rt cannot overflow. The critical case b = d
// is outside the formula's branch.
inline double bp_survival(double b, double d, double t) {
    if (!(b >= 0.0) || !(d >= 0.0))
        throw std::invalid_argument("rates must be nonnegative");
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    if (b == d) throw std::domain_error("out of scope: critical case b = d");
    const double r = b - d;
    const double v = r / (b - d * std::exp(-r * t));
    return std::min(1.0, std::max(0.0, v));
}

// Survival of at least one of n independent ancestors.
inline double bp_survival(double b, double d, double t, std::int64_t ancestors) {
    if (ancestors < 0) throw std::invalid_argument("need a nonnegative count");
    if (ancestors == 0) return 0.0;
    const double single = bp_survival(b, d, t);
    return -std::expm1(static_cast<double>(ancestors) * std::log1p(-single));
}

struct BPIPath {
    double t_end_logk = 0.0;
    std::int64_t terminal = 0;
    std::vector<double> grid;  // log-K times actually recorded
    std::vector<std::int64_t> counts_at;
    std::uint64_t events_executed = 0;
    bool truncated = false;

    friend bool operator==(const BPIPath&, const BPIPath&) = default;
};

// Exact jump simulation. The immigration clock is drawn by inverting the
// cumulative rate K^c (e^(a(t+w)) - e^(at))/a analytically; independent
// increments let the clock be redrawn from scratch after every event.
inline BPIPath bpi_simulate(const BPIParams& p, double t_end_logk,
                            std::uint64_t seed,
                            const std::vector<double>& grid = {},
                            std::uint64_t event_budget = 10'000'000'000ull) {
    p.validate();
    if (!(t_end_logk >= 0.0))
        throw std::invalid_argument("horizon must be nonnegative");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > t_end_logk)
            throw std::invalid_argument("record grid leaves [0, horizon]");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw std::invalid_argument("record grid must increase strictly");
    }
    const double logK = std::log(static_cast<double>(p.K));
    const double T = t_end_logk * logK;
    const double gc = p.imm_scale();
    const double inf = std::numeric_limits<double>::infinity();

    Xoshiro256pp rng(seed);
    std::int64_t n = p.init_count();
    double t = 0.0;
    std::size_t gi = 0;

    BPIPath path;
    path.t_end_logk = t_end_logk;
    path.grid.reserve(grid.size());
    auto record_through = [&](double cut_abs, bool inclusive) {
        while (gi < grid.size() &&
               (inclusive ? grid[gi] * logK <= cut_abs
                          : grid[gi] * logK < cut_abs)) {
            path.grid.push_back(grid[gi]);
            path.counts_at.push_back(n);
            ++gi;
        }
    };

    while (true) {
        const double lin = (p.b + p.d) * static_cast<double>(n);
        const double t_lin = lin > 0.0 ? t + rng.exponential(lin) : inf;
        double t_imm = inf;
        if (gc > 0.0) {
            const double e = rng.exponential(1.0);
            if (p.a == 0.0) {
                t_imm = t + e / gc;
            } else {
                const double q = p.a * e * std::exp(-p.a * t) / gc;
                if (q > -1.0) t_imm = t + std::log1p(q) / p.a;
            }
        }
        const double tn = std::min(t_lin, t_imm);
        if (tn > T) {
            record_through(T, true);
            break;
        }
        if (path.events_executed >= event_budget) {
            path.truncated = true;
            break;
        }
        record_through(tn, false);
        t = tn;
        ++path.events_executed;
        if (t_imm <= t_lin) {
            n += 1;
        } else {
            n += rng.uniform() * (p.b + p.d) < p.b ? 1 : -1;
        }
    }
    path.terminal = n;
    return path;
}

}  // namespace hgt
