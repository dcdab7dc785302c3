#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hgt/outcome.hpp"

using namespace hgt;
using Catch::Approx;

namespace {

constexpr double kAlphaPi = 0.3183098861837906715;  // 1/pi

// Parameter sets per outcome, all generic, used for oracle cross-checks.
struct Pset {
    double delta, alpha, tau;
};
const Pset kReemerge[] = {
    {0.3, kAlphaPi, 1.0}, {0.23, 0.2, 0.95}, {0.35, 0.15, 1.23},
    {0.52, 0.25, 1.31},   {0.45, 0.3, 1.27}, {0.22, kAlphaPi, 0.9},
};
const Pset kSubK[] = {
    {0.8, 0.3, 1.9}, {0.9, 0.25, 1.85}, {1.1, 0.35, 1.75},
    {1.2, 0.4, 1.9}, {0.7, 0.2, 1.76},
};
const Pset kSuicide[] = {
    {0.41, kAlphaPi, 2.8}, {0.52, 0.6, 2.3}, {0.31, 0.5, 2.0},
    {0.61, 0.7, 2.5},      {0.45, 0.8, 1.9},
};

double window_of(const ModelParams& p) {
    const auto rep = classify(p);
    const int ceil3 = static_cast<int>(ceil_snap(3.0 / p.delta()));
    double w = ceil3 * p.alpha() / (p.tau() - p.delta());
    if (rep.m0 > 0.0) w = std::min(w, *rep.tau_bar);
    return w;
}

}  // namespace

TEST_CASE("ladder indices") {
    REQUIRE(indices(ModelParams(0.41, 0.5, 2.8, 1.0)) == std::pair{7, 13});
    REQUIRE(indices(ModelParams(0.3, 0.5, 1.0, 1.0)) == std::pair{4, 6});
    // integral ratios snap instead of flapping on rounding
    REQUIRE(indices(ModelParams(0.5, 0.5, 2.0, 1.0)) == std::pair{4, 8});
    REQUIRE_THROWS_AS(indices(ModelParams(1.4, 0.5, 0.9, 1.0)), std::invalid_argument);
}

TEST_CASE("minimum of the falling exponent") {
    REQUIRE(m0(ModelParams(0.3, kAlphaPi, 1.0, 1.0)) ==
            Approx(1.0 - (3.0 / M_PI) / 0.7 * 0.4).epsilon(1e-12));
    REQUIRE(m0(ModelParams(0.41, kAlphaPi, 2.8, 1.0)) ==
            Approx(1.0 - (6.0 / M_PI) / 2.39 * 1.365).epsilon(1e-12));
    REQUIRE(m0(ModelParams(0.8, 0.3, 1.9, 1.0)) ==
            Approx(1.0 - 0.6 / 1.1 * 0.7).epsilon(1e-12));
    REQUIRE_THROWS_AS(m0(ModelParams(1.4, 0.5, 2.0, 1.0)), std::domain_error);
    REQUIRE_THROWS_AS(m0(ModelParams(0.5, 0.5, 3.2, 1.0)), std::domain_error);
}

TEST_CASE("return time of trait zero") {
    ModelParams p(0.3, kAlphaPi, 1.0, 1.0);
    const double a = kAlphaPi;
    const double expected = 6 * a / 0.7 + (5 * a / 0.7) * 0.1 / 0.8;
    REQUIRE(tau_bar(p) == Approx(expected).epsilon(1e-12));
    REQUIRE(tau_bar(p) > 6 * a / 0.7);
    REQUIRE_THROWS_AS(tau_bar(ModelParams(0.41, kAlphaPi, 2.8, 1.0)),
                      std::domain_error);
}

TEST_CASE("classification of the three regimes") {
    auto r1 = classify(ModelParams(0.3, kAlphaPi, 1.0, 1.0));
    REQUIRE(r1.classification == OutcomeClass::ReemergenceOfZero);
    REQUIRE(r1.k_tilde == 4);
    REQUIRE(r1.k_bar == 6);
    REQUIRE(r1.tau_bar.has_value());
    REQUIRE_FALSE(r1.dominance_dips_below_one);

    auto r2 = classify(ModelParams(0.41, kAlphaPi, 2.8, 1.0));
    REQUIRE(r2.classification == OutcomeClass::EvolutionarySuicide);
    REQUIRE(r2.m0 < 0.0);
    REQUIRE_FALSE(r2.tau_bar.has_value());

    auto r3 = classify(ModelParams(0.8, 0.3, 1.9, 1.0));
    REQUIRE(r3.classification == OutcomeClass::SubKReemergence);
    REQUIRE(r3.k_bar * 0.8 > 3.0);
    REQUIRE(r3.dominance_dips_below_one);

    SECTION("decision is independent of the competition coefficient") {
        for (double c : {0.1, 1.0, 10.0}) {
            REQUIRE(classify(ModelParams(0.3, kAlphaPi, 1.0, c)).classification ==
                    OutcomeClass::ReemergenceOfZero);
            REQUIRE(classify(ModelParams(0.41, kAlphaPi, 2.8, c)).m0 == r2.m0);
            REQUIRE(classify(ModelParams(0.8, 0.3, 1.9, c)).classification ==
                    OutcomeClass::SubKReemergence);
        }
    }
}

TEST_CASE("boundary parameters are refused, not guessed") {
    auto expect_oos = [](const ModelParams& p, const std::string& needle) {
        auto r = classify(p);
        REQUIRE(r.classification == OutcomeClass::OutOfScope);
        REQUIRE(r.reason.find(needle) != std::string::npos);
    };
    expect_oos(ModelParams(0.5, 0.3, 0.5, 1.0), "tau = delta");
    expect_oos(ModelParams(0.5, 0.3, 0.4, 1.0), "delta < tau");
    expect_oos(ModelParams(0.5, 0.3, 3.0, 1.0), "tau = 3");
    expect_oos(ModelParams(0.5, 0.3, 3.5, 1.0), "tau < 3");
    expect_oos(ModelParams(4.0 / 3.0, 0.3, 2.0, 1.0), "delta = 4/3");
    expect_oos(ModelParams(1.39, 0.3, 2.0, 1.0), "delta < 4/3");
    // delta=0.3, alpha=0.5, tau=1.2 gives m0 = 1 - 1.5/0.9*0.6 = 0 exactly
    expect_oos(ModelParams(0.3, 0.5, 1.2, 1.0), "m0 = 0");
    // k_bar*delta = 3 exactly: delta=0.5, tau=1.55 -> k_bar=6
    expect_oos(ModelParams(0.5, 0.3, 1.55, 1.0), "k_bar*delta = 3");
}

TEST_CASE("closed-form exponent formulas") {
    SECTION("suicide case pins the dead traits to exact zero") {
        ModelParams p(0.41, kAlphaPi, 2.8, 1.0);
        // phase 7 starts at 7*alpha/2.39; k_tilde = 7 so trait 0 is gone
        const double s7 = 7 * kAlphaPi / 2.39;
        auto beta = closed_form_beta(p, s7 + 0.05);
        REQUIRE(beta[0] == 0.0);
        REQUIRE(beta[7] == 1.0);
        for (int ell = 8; ell <= p.num_traits(); ++ell)
            REQUIRE(beta[static_cast<std::size_t>(ell)] ==
                    Approx(std::max(0.0, 1 - (ell - 7) * kAlphaPi + 2.39 * 0.05))
                        .margin(1e-12));
    }
    SECTION("outside the validity window the formulas refuse") {
        ModelParams p(0.3, kAlphaPi, 1.0, 1.0);
        REQUIRE_THROWS_AS(closed_form_beta(p, *classify(p).tau_bar + 0.01),
                          std::out_of_range);
        REQUIRE_THROWS_AS(closed_form_beta(p, -0.5), std::out_of_range);
        REQUIRE_THROWS_AS(closed_form_beta(ModelParams(0.5, 0.3, 0.4, 1.0), 0.1),
                          std::domain_error);
    }
    SECTION("phase floor: the current dominant reports exactly one") {
        for (const auto& ps : kReemerge) {
            ModelParams p(ps.delta, ps.alpha, ps.tau, 1.0);
            const double td = ps.tau - ps.delta;
            for (int k = 0; k < classify(p).k_bar; ++k) {
                const double s = (k + 0.5) * ps.alpha / td;
                if (s > window_of(p)) break;
                auto beta = closed_form_beta(p, s);
                REQUIRE(beta[static_cast<std::size_t>(k)] == 1.0);
            }
        }
    }
}

TEST_CASE("closed forms agree with the limit engine") {
    std::mt19937_64 gen(911u);
    auto check_set = [&](const Pset& ps) {
        ModelParams p(ps.delta, ps.alpha, ps.tau, 1.0);
        const double w = window_of(p);
        auto traj = run_limit(p, {.t_max = w});
        std::uniform_real_distribution<double> ud(0.0, w * 0.999999);
        for (int rep = 0; rep < 1000; ++rep) {
            const double s = ud(gen);
            auto oracle = closed_form_beta(p, s);
            auto engine = sample_limit(traj, s);
            REQUIRE(engine.beta.size() == oracle.size());
            for (std::size_t l = 0; l < oracle.size(); ++l) {
                INFO("delta=" << ps.delta << " alpha=" << ps.alpha << " tau="
                              << ps.tau << " s=" << s << " l=" << l);
                REQUIRE(engine.beta[l] == Approx(oracle[l]).margin(1e-9));
            }
        }
    };
    for (const auto& ps : kReemerge) check_set(ps);
    for (const auto& ps : kSubK) check_set(ps);
    for (const auto& ps : kSuicide) check_set(ps);
}

TEST_CASE("engine phase times follow the ladder law") {
    auto check = [](const Pset& ps) {
        ModelParams p(ps.delta, ps.alpha, ps.tau, 1.0);
        const double td = ps.tau - ps.delta;
        const auto rep = classify(p);
        const int ceil3 = static_cast<int>(ceil_snap(3.0 / ps.delta));
        int k_hi = ceil3 - 1;
        if (rep.m0 > 0.0) k_hi = std::min(k_hi, rep.k_bar);
        auto traj = run_limit(p, {.t_max = window_of(p)});
        REQUIRE(static_cast<int>(traj.phase_times.size()) >= k_hi);
        for (int k = 1; k <= k_hi; ++k) {
            REQUIRE(traj.phase_times[static_cast<std::size_t>(k - 1)] ==
                    Approx(k * ps.alpha / td).epsilon(1e-9));
            REQUIRE(traj.dominant_indices[static_cast<std::size_t>(k)] == k);
        }
    };
    for (const auto& ps : kReemerge) check(ps);
    for (const auto& ps : kSubK) check(ps);
    for (const auto& ps : kSuicide) check(ps);
}

TEST_CASE("re-emergence detector matches tau_bar") {
    for (const auto& ps : kReemerge) {
        ModelParams p(ps.delta, ps.alpha, ps.tau, 1.0);
        const double tb = *classify(p).tau_bar;
        auto traj = run_limit(p, {.t_max = tb + 0.1});
        auto t0 = first_reemergence_time(traj, 0);
        REQUIRE(t0.has_value());
        REQUIRE(*t0 == Approx(tb).epsilon(1e-9));
    }
    SECTION("never fires when trait 0 holds dominance forever") {
        ModelParams p(1.4, 0.4, 0.9, 1.0);
        auto traj = run_limit(p, {.t_max = 30.0});
        REQUIRE_FALSE(first_reemergence_time(traj, 0).has_value());
    }
}

TEST_CASE("sub-K dip shows up in the engine") {
    for (const auto& ps : kSubK) {
        ModelParams p(ps.delta, ps.alpha, ps.tau, 1.0);
        auto traj = run_limit(p, {.t_max = 14.0});
        std::optional<double> reemerge;
        for (int ell = 0; ell <= p.num_traits() && !reemerge; ++ell)
            if (ell * ps.delta < 3.0)
                if (auto t = first_reemergence_time(traj, ell);
                    t.has_value() && *t > kTol)
                    reemerge = t;
        REQUIRE(reemerge.has_value());
        auto [dip, where] = min_max_exponent(traj, 0.0, *reemerge);
        INFO("dip=" << dip << " at t=" << where);
        REQUIRE(dip < 1.0 - 1e-9);
    }
}
