#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgt/numeric.hpp"

namespace hgt {

// Trait grid {0, delta, 2*delta, ..., L*delta} inside [0,4], L = floor(4/delta).
// Individuals of trait x=l*delta give birth at rate 4-x (mutating to (l+1)*delta
// with probability K^-alpha), die at rate 1 + C*N/K, and convert lower-trait
// partners at pairwise rate tau/N.
class ModelParams {
public:
    ModelParams(double delta, double alpha, double tau, double comp)
        : delta_(delta), alpha_(alpha), tau_(tau), comp_(comp) {
        if (!(delta > 0.0) || !(delta < 4.0))
            throw std::invalid_argument("delta must lie in (0,4)");
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0,1)");
        if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
        if (!(comp > 0.0)) throw std::invalid_argument("C must be > 0");
    }

    double delta() const { return delta_; }
    double alpha() const { return alpha_; }
    double tau() const { return tau_; }
    double comp() const { return comp_; }

    // Number of trait steps; traits are indexed 0..num_traits().
    int num_traits() const { return static_cast<int>(floor_snap(4.0 / delta_)); }

    double trait(int ell) const { return static_cast<double>(ell) * delta_; }

private:
    double delta_, alpha_, tau_, comp_;
};

inline void check_trait_index(const ModelParams& p, int ell) {
    if (ell < 0 || ell > p.num_traits())
        throw std::out_of_range("trait index outside grid");
}

inline double birth_rate(const ModelParams& p, int ell) {
    check_trait_index(p, ell);
    return 4.0 - p.trait(ell);
}

inline int sgn(int v) { return (v > 0) - (v < 0); }

// Invasion fitness of trait y = ell_mut*delta against a resident x = ell_res*delta
// sitting at its demographic equilibrium: x - y + tau*sign(y - x).
inline double fitness_resident(const ModelParams& p, int ell_mut, int ell_res) {
    check_trait_index(p, ell_mut);
    check_trait_index(p, ell_res);
    return p.trait(ell_res) - p.trait(ell_mut) +
           p.tau() * static_cast<double>(sgn(ell_mut - ell_res));
}

// Growth rate of trait y when the dominant trait x has no equilibrium mass
// (death pressure 1 only): 3 - y + tau*sign(y - x).
inline double fitness_dominant(const ModelParams& p, int ell_mut, int ell_dom) {
    check_trait_index(p, ell_mut);
    check_trait_index(p, ell_dom);
    return 3.0 - p.trait(ell_mut) +
           p.tau() * static_cast<double>(sgn(ell_mut - ell_dom));
}

// Monomorphic equilibrium density (3 - x)/C; negative for x > 3 (no equilibrium).
inline double equilibrium_density(const ModelParams& p, int ell) {
    check_trait_index(p, ell);
    return (3.0 - p.trait(ell)) / p.comp();
}

// Start populations: trait 0 at its equilibrium mass, trait l at K^(1-l*alpha)
// for l up to floor(1/alpha), empty beyond.
inline std::vector<std::int64_t> initial_condition(const ModelParams& p, double K) {
    if (!(K >= 2.0)) throw std::invalid_argument("K must be >= 2");
    const int L = p.num_traits();
    const std::int64_t lmax = floor_snap(1.0 / p.alpha());
    std::vector<std::int64_t> n(static_cast<std::size_t>(L) + 1, 0);
    n[0] = static_cast<std::int64_t>(std::floor(3.0 * K / p.comp()));
    for (int ell = 1; ell <= L; ++ell) {
        if (ell <= lmax) {
            const double e = 1.0 - ell * p.alpha();
            n[static_cast<std::size_t>(ell)] =
                static_cast<std::int64_t>(std::floor(std::pow(K, e)));
        }
    }
    return n;
}

struct GenericityReport {
    bool ok = true;                       // no violations of the phase-construction assumptions
    std::vector<std::string> violations;  // includes scope notes for the outcome theorem
};

// The phase construction assumes 3/delta, (tau+3)/delta, (tau-3)/delta are not
// in {0,1,2,...}; the outcome classification additionally needs delta < 4/3 and
// delta < tau < 3. Only the first three affect `ok`.
inline GenericityReport genericity_check(const ModelParams& p, double tol = kTol) {
    GenericityReport r;
    auto flag = [&](const std::string& msg, bool core) {
        r.violations.push_back(msg);
        if (core) r.ok = false;
    };
    if (is_natural(3.0 / p.delta(), tol)) flag("3/delta is a natural number", true);
    if (is_natural((p.tau() + 3.0) / p.delta(), tol))
        flag("(tau+3)/delta is a natural number", true);
    if (is_natural((p.tau() - 3.0) / p.delta(), tol))
        flag("(tau-3)/delta is a natural number", true);
    if (p.delta() >= 4.0 / 3.0 - tol)
        flag("delta >= 4/3: outcome classification out of scope", false);
    if (!(p.tau() > p.delta() + tol) || !(p.tau() < 3.0 - tol))
        flag("tau outside (delta, 3): outcome classification out of scope", false);
    return r;
}

}  // namespace hgt
