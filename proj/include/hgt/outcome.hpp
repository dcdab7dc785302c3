#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hgt/limit.hpp"
#include "hgt/model.hpp"
#include "hgt/numeric.hpp"

namespace hgt {

// Long-run fate of the population when transfer beats the mutation step
// (delta < tau < 3, delta < 4/3). Everything here is a closed-form function of
// (delta, alpha, tau); nothing simulates, so these routines double as an
// independent oracle for the limit engine.

enum class OutcomeClass {
    ReemergenceOfZero,    // trait 0 recovers dominance before anything dies out
    EvolutionarySuicide,  // the whole population dies with the climbing ladder
    SubKReemergence,      // a trait below 3 recovers after a global dip below K
    OutOfScope            // parameters outside or on the boundary of the criterion
};

struct OutcomeReport {
    int k_tilde = 0;  // ceil(tau/delta): first trait that can outrun the fall of 0
    int k_bar = 0;    // floor(2*tau/delta): phase in which an exponent can return to 1
    double m0 = 0.0;  // minimum of beta_0 along the ladder climb; its sign decides
    std::optional<double> tau_bar;  // return time of beta_0 to 1 (defined iff m0 > 0)
    OutcomeClass classification = OutcomeClass::OutOfScope;
    std::string reason;  // non-empty only for OutOfScope
    // Recorded claim for SubKReemergence: before the first re-emergence the
    // maximal exponent dips strictly below 1 (total population drops below K).
    bool dominance_dips_below_one = false;
};

inline std::pair<int, int> indices(const ModelParams& p) {
    if (!(p.tau() > p.delta()))
        throw std::invalid_argument("indices requires tau > delta");
    const int k_tilde = static_cast<int>(ceil_snap(p.tau() / p.delta()));
    const int k_bar = static_cast<int>(floor_snap(2.0 * p.tau() / p.delta()));
    return {k_tilde, k_bar};
}

inline double m0(const ModelParams& p) {
    if (!(p.delta() < p.tau() && p.tau() < 3.0 && p.delta() < 4.0 / 3.0))
        throw std::domain_error("m0 requires delta < tau < 3 and delta < 4/3");
    const auto [k_tilde, k_bar] = indices(p);
    (void)k_bar;
    return 1.0 - p.alpha() * (k_tilde - 1) / (p.tau() - p.delta()) *
                     (p.tau() - 0.5 * k_tilde * p.delta());
}

inline double tau_bar(const ModelParams& p) {
    if (!(m0(p) > 0.0)) throw std::domain_error("tau_bar is undefined when m0 <= 0");
    const int k_bar = indices(p).second;
    const double td = p.tau() - p.delta();
    return k_bar * p.alpha() / td +
           p.alpha() * (k_bar - 1) / td * (p.tau() - 0.5 * k_bar * p.delta()) /
               (k_bar * p.delta() - p.tau());
}

inline OutcomeReport classify(const ModelParams& p, double tol = kTol) {
    OutcomeReport rep;
    auto out = [&](std::string why) {
        rep.classification = OutcomeClass::OutOfScope;
        rep.reason = std::move(why);
        return rep;
    };
    const double delta = p.delta(), tau = p.tau();
    if (std::abs(tau - delta) <= tol * std::max(1.0, tau))
        return out("boundary: tau = delta");
    if (tau < delta) return out("requires delta < tau");
    rep.k_tilde = indices(p).first;
    rep.k_bar = indices(p).second;
    if (std::abs(tau - 3.0) <= 3.0 * tol) return out("boundary: tau = 3");
    if (tau > 3.0) return out("requires tau < 3");
    if (std::abs(delta - 4.0 / 3.0) <= tol * 4.0 / 3.0)
        return out("boundary: delta = 4/3");
    if (delta > 4.0 / 3.0) return out("requires delta < 4/3");

    rep.m0 = m0(p);
    if (std::abs(rep.m0) <= tol) return out("boundary: m0 = 0");
    if (std::abs(rep.k_bar * delta - 3.0) <= 3.0 * tol)
        return out("boundary: k_bar*delta = 3");

    if (rep.m0 < 0.0) {
        rep.classification = OutcomeClass::EvolutionarySuicide;
        return rep;
    }
    rep.tau_bar = tau_bar(p);
    if (rep.k_bar * delta < 3.0) {
        rep.classification = OutcomeClass::ReemergenceOfZero;
    } else {
        rep.classification = OutcomeClass::SubKReemergence;
        rep.dominance_dips_below_one = true;
    }
    return rep;
}

// Exponent vector at log-K time s from the closed-form phase formulas. Valid
// while the dominant trait stays below 3 and, when m0 > 0, until the return
// time tau_bar; beyond the window the formulas are silent and we refuse.
inline std::vector<double> closed_form_beta(const ModelParams& p, double s,
                                            double tol = kTol) {
    const OutcomeReport rep = classify(p, tol);
    if (rep.classification == OutcomeClass::OutOfScope)
        throw std::domain_error("closed-form exponents: " + rep.reason);
    const double alpha = p.alpha(), delta = p.delta(), tau = p.tau();
    const double td = tau - delta;
    const int L = p.num_traits();
    const int ceil3 = static_cast<int>(ceil_snap(3.0 / delta));
    const double s_ceil3 = ceil3 * alpha / td;

    double window = s_ceil3;
    int k_max = ceil3 - 1;
    if (rep.m0 > 0.0) {
        window = std::min(window, *rep.tau_bar);
        k_max = std::min(k_max, rep.k_bar);
    }
    if (s < -tol || s > window + tol * std::max(1.0, window))
        throw std::out_of_range("time outside the closed-form validity window");

    int k = static_cast<int>(floor_snap(std::max(s, 0.0) * td / alpha));
    k = std::min(k, k_max);
    const double u = s - k * alpha / td;

    std::vector<double> beta(static_cast<std::size_t>(L) + 1, 0.0);
    for (int ell = 0; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        if (ell == k) {
            beta[i] = 1.0;
        } else if (ell > k) {
            beta[i] = std::max(0.0, 1.0 - (ell - k) * alpha + td * u);
        } else if (rep.m0 > 0.0 && k == rep.k_bar) {
            const double lead = 1.0 -
                                alpha * (k - ell - 1) / td *
                                    (tau - 0.5 * (k - ell) * delta) -
                                (tau - (k - ell) * delta) * u;
            const double chase = 1.0 - ell * alpha -
                                 alpha * (k - 1) / td * (tau - 0.5 * k * delta) -
                                 (tau - k * delta) * u;
            beta[i] = std::max(lead, chase);
        } else if (rep.m0 > 0.0) {
            beta[i] = 1.0 -
                      alpha * (k - ell - 1) / td * (tau - 0.5 * (k - ell) * delta) -
                      (tau - (k - ell) * delta) * u;
        } else if (ell <= k - rep.k_tilde) {
            beta[i] = 0.0;
        } else {
            beta[i] = std::max(
                0.0, 1.0 - alpha * (k - ell - 1) / td * (tau - 0.5 * (k - ell) * delta) -
                         (tau - (k - ell) * delta) * u);
        }
    }
    return beta;
}

// First time after leaving the ceiling at which an exponent returns to 1.
inline std::optional<double> first_reemergence_time(const LimitTrajectory& traj,
                                                    int ell, double tol = kTol) {
    const auto i = static_cast<std::size_t>(ell);
    bool left = false;
    for (const auto& seg : traj.segments) {
        if (i >= seg.beta_start.size()) throw std::out_of_range("trait index");
        const double len = seg.t_end - seg.t_start;
        const double v0 = seg.beta_start[i];
        const double v1 = v0 + seg.slopes[i] * len;
        if (!left) {
            if (v0 < 1.0 - tol || v1 < 1.0 - tol) left = true;
            if (v0 < 1.0 - tol && seg.slopes[i] > tol && v1 >= 1.0 - tol)
                return seg.t_start + (1.0 - v0) / seg.slopes[i];
            continue;
        }
        if (v0 >= 1.0 - tol) return seg.t_start;
        if (seg.slopes[i] > tol && v1 >= 1.0 - tol)
            return seg.t_start + (1.0 - v0) / seg.slopes[i];
    }
    return std::nullopt;
}

// Minimum over [t_lo, t_hi] of the maximal exponent, with its location. The
// per-segment maximum is convex, so segment endpoints clipped to the window
// are enough.
inline std::pair<double, double> min_max_exponent(const LimitTrajectory& traj,
                                                  double t_lo, double t_hi) {
    double best = std::numeric_limits<double>::infinity();
    double where = t_lo;
    auto consider = [&](const Segment& seg, double t) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < seg.beta_start.size(); ++l)
            m = std::max(m, seg.beta_start[l] + seg.slopes[l] * (t - seg.t_start));
        if (m < best) {
            best = m;
            where = t;
        }
    };
    for (const auto& seg : traj.segments) {
        if (seg.t_end < t_lo || seg.t_start > t_hi) continue;
        consider(seg, std::max(seg.t_start, t_lo));
        consider(seg, std::min(seg.t_end, t_hi));
    }
    return {best, where};
}

}  // namespace hgt
