// Acceptance gate: nine checks against frozen values and statistical bounds,
// one verdict line each. Exits nonzero when any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hgt/bpi.hpp"
#include "hgt/io.hpp"
#include "hgt/limit.hpp"
#include "hgt/model.hpp"
#include "hgt/outcome.hpp"
#include "hgt/rng.hpp"
#include "hgt/ssa.hpp"

using namespace hgt;

namespace {

int failures = 0;

void verdict(int idx, bool ok, const std::string& name, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

bool rel_eq(double got, double want, double tol = 1e-9) {
    return std::abs(got - want) <= tol * std::max({1.0, std::abs(got), std::abs(want)});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int worker_threads() {
    const char* env = std::getenv("HGT_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

const double kPi = std::acos(-1.0);
const double kAlphaPi = 1.0 / kPi;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

// ---- criterion 1: golden phase times and periodicity -----------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream why;

    const ModelParams p(1.4, kAlphaPi, 1.5, 1.0);
    const double a = kAlphaPi;
    EngineOptions opt;
    opt.t_max = 30.0;
    const LimitTrajectory traj = run_limit(p, opt);

    const double want[] = {10 * a, 20 * a, 20 * a + a / 1.3, 20 * a + 2 * a / 1.3};
    if (traj.phase_times.size() < 4) {
        ok = false;
        why << "fewer than 4 phase boundaries; ";
    } else {
        for (int k = 0; k < 4; ++k)
            if (!rel_eq(traj.phase_times[static_cast<std::size_t>(k)], want[k])) {
                ok = false;
                why << "s" << k + 1 << "=" << traj.phase_times[static_cast<std::size_t>(k)]
                    << " wants " << want[k] << "; ";
            }
    }

    const double period = a * (10.0 + 2.0 / 1.3);
    for (std::size_t k = 0; k + 3 < traj.phase_times.size(); ++k)
        if (!rel_eq(traj.phase_times[k + 3] - traj.phase_times[k], period)) {
            ok = false;
            why << "period breaks at boundary " << k + 1 << "; ";
        }
    for (double t = want[0]; t + period < 29.0; t += 0.37) {
        const SampleRow now = sample_limit(traj, t);
        const SampleRow later = sample_limit(traj, t + period);
        for (std::size_t l = 0; l < now.beta.size(); ++l)
            if (std::abs(now.beta[l] - later.beta[l]) > 1e-9) {
                ok = false;
                why << "state not periodic at t=" << t << "; ";
            }
    }

    const double dt = seconds_since(t0);
    if (dt >= 1.0) {
        ok = false;
        why << "runtime " << dt << "s exceeds 1s; ";
    }
    verdict(1, ok, "golden phase times and periodicity",
            ok ? fmt("s1..s4 and period to 1e-9 rel, %.2fs", dt) : why.str());
}

// ---- criterion 2: one golden table per qualitative regime ------------------

struct Golden {
    const char* name;
    ModelParams p;
    double t_max;
    std::vector<double> phase_times;           // strictly the leading boundaries
    std::vector<std::pair<double, std::vector<double>>> beta_at;  // time -> exponents
    std::optional<double> extinction_time;
};

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream why;
    const double a = kAlphaPi;

    std::vector<Golden> table;
    table.push_back({"frozen", ModelParams(1.4, 0.4, 0.9, 1.0), 50.0, {},
                     {{49.0, {1.0, 0.6, 0.2}}}, std::nullopt});
    table.push_back({"slow cycle", ModelParams(1.4, a, 1.5, 1.0), 8.0,
                     {10 * a, 20 * a, 20 * a + a / 1.3, 20 * a + 2 * a / 1.3},
                     {{10 * a, {1.0, 1.0, 1 - a}},
                      {20 * a, {1 - a, 1.0, 1.0}},
                      {20 * a + a / 1.3, {1.0, 1 - a * 0.1 / 1.3, 1.0}},
                      {20 * a + 2 * a / 1.3, {1.0, 1.0, 1 - a}}},
                     std::nullopt});
    table.push_back({"fast cycle", ModelParams(1.4, 0.4, 2.2, 1.0), 8.0,
                     {0.5, 1.0, 1.0 + 2.0 / 3.0, 1.0 + 2.0 / 3.0 + 0.5,
                      1.0 + 2.0 / 3.0 + 0.875, 1.0 + 2.0 / 3.0 + 1.375},
                     {{1.0 + 2.0 / 3.0, {1.0, 0.6, 1.0}}},
                     std::nullopt});
    {
        const double td = 1.53, meet = 1.0 - 0.4 * 0.8 / 0.37;
        table.push_back({"drop and recovery", ModelParams(1.9, 0.4, 3.43, 1.0), 1.9,
                         {0.4 / td, 0.8 / td, 0.8 / td + 0.4 / 0.37},
                         {{0.8 / td + 0.4 / 0.37, {meet, 0.0, meet}}},
                         std::nullopt});
    }
    table.push_back({"meet below one", ModelParams(1.6, 0.25, 1.7, 1.0), 5.5,
                     {2.5, 5.0, 5.0 + 0.25 / 1.5},
                     {{5.0 + 0.25 / 1.5,
                       {1.0 - 0.25 * 0.2 / 1.5, 0.95, 1.0 - 0.25 * 0.2 / 1.5}}},
                     std::nullopt});
    table.push_back({"ladder extinction", ModelParams(1.9, 0.4, 4.3, 1.0), 4.0,
                     {0.4 / 2.4, 0.8 / 2.4},
                     {},
                     0.8 / 2.4 + 1.0 / 0.8});  // s2 + 1/(2*delta - 3)
    table.push_back({"starved extinction", ModelParams(1.9, 0.5, 3.43, 1.0), 4.0,
                     {0.5 / 1.53, 1.0 / 1.53},
                     {},
                     1.0 / 1.53 + 1.0 / 0.8});
    table.push_back({"strong-transfer survivor", ModelParams(1.4, 0.4, 3.1, 1.0), 12.0,
                     {0.4 / 1.7, 0.8 / 1.7},
                     {},
                     std::nullopt});

    for (const auto& g : table) {
        EngineOptions opt;
        opt.t_max = g.t_max;
        const LimitTrajectory traj = run_limit(g.p, opt);
        for (std::size_t k = 0; k < g.phase_times.size(); ++k) {
            if (k >= traj.phase_times.size() ||
                !rel_eq(traj.phase_times[k], g.phase_times[k])) {
                ok = false;
                why << g.name << ": boundary " << k + 1 << " off; ";
            }
        }
        for (const auto& [t, betas] : g.beta_at) {
            const SampleRow row = sample_limit(traj, t);
            for (std::size_t l = 0; l < betas.size(); ++l)
                if (std::abs(row.beta[l] - betas[l]) >
                    1e-9 * std::max(1.0, std::abs(betas[l]))) {
                    ok = false;
                    why << g.name << ": beta_" << l << "(" << t << ") = " << row.beta[l]
                        << " wants " << betas[l] << "; ";
                }
        }
        if (g.extinction_time) {
            if (traj.termination.kind != TerminationKind::GlobalExtinction ||
                !rel_eq(traj.termination.time, *g.extinction_time)) {
                ok = false;
                why << g.name << ": extinction time off; ";
            }
        }
    }

    // additional frozen interior values of the fast cycle and the survivor
    {
        const LimitTrajectory traj = run_limit(ModelParams(1.4, 0.4, 2.2, 1.0), {.t_max = 8.0});
        const double s3 = 1.0 + 2.0 / 3.0;
        if (!rel_eq(sample_limit(traj, s3 + 0.5).beta[2], 0.7) ||
            !rel_eq(sample_limit(traj, s3 + 0.875).beta[0], 0.7) ||
            !rel_eq(sample_limit(traj, s3 + 1.375).beta[1], 0.6)) {
            ok = false;
            why << "fast cycle interior values off; ";
        }
    }
    {
        const LimitTrajectory traj = run_limit(ModelParams(1.4, 0.4, 3.1, 1.0), {.t_max = 12.0});
        const double s2 = 0.8 / 1.7;
        for (double u : {0.1, 0.45, 0.6, 1.1, 1.9, 2.5, 5.0}) {
            const SampleRow r = sample_limit(traj, s2 + u);
            if (std::abs(r.beta[0] - std::max(0.6 - 0.3 * u, 0.0)) > 1e-9 ||
                std::abs(r.beta[1] - std::max({1 - 1.7 * u, 0.2 - 0.3 * u, 0.0})) > 1e-9 ||
                std::abs(r.beta[2] - 1.0) > 1e-9) {
                ok = false;
                why << "survivor closed form off at u=" << u << "; ";
            }
        }
    }

    const double dt = seconds_since(t0);
    if (dt >= 5.0) {
        ok = false;
        why << "runtime " << dt << "s exceeds 5s; ";
    }
    verdict(2, ok, "golden tables across all qualitative regimes",
            ok ? fmt("8 parameter sets to 1e-9, %.2fs", dt) : why.str());
}

// ---- criterion 3: ladder-phase closed form vs engine -----------------------

void criterion_3() {
    bool ok = true;
    std::ostringstream why;

    struct Case {
        ModelParams p;
        int k_max;  // ladder boundaries expected inside the window
    };
    const Case cases[] = {{ModelParams(0.3, kAlphaPi, 1.0, 1.0), 6},
                          {ModelParams(0.41, kAlphaPi, 2.8, 1.0), 7}};

    for (const auto& cs : cases) {
        const ModelParams& p = cs.p;
        const double td = p.tau() - p.delta();
        const OutcomeReport rep = classify(p);
        const int ceil3 = static_cast<int>(ceil_snap(3.0 / p.delta()));
        double window = ceil3 * p.alpha() / td;
        if (rep.m0 > 0.0) window = std::min(window, *rep.tau_bar);

        EngineOptions opt;
        opt.t_max = window + 1.0;
        const LimitTrajectory traj = run_limit(p, opt);

        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double t = window * i / 1000.0;
            const std::vector<double> closed = closed_form_beta(p, t);
            const SampleRow row = sample_limit(traj, t);
            for (std::size_t l = 0; l < closed.size(); ++l)
                worst = std::max(worst, std::abs(closed[l] - row.beta[l]));
        }
        if (worst >= 1e-9) {
            ok = false;
            why << "delta=" << p.delta() << ": max closed-form error " << worst << "; ";
        }
        for (int k = 1; k <= cs.k_max; ++k) {
            if (static_cast<std::size_t>(k) > traj.phase_times.size() ||
                !rel_eq(traj.phase_times[static_cast<std::size_t>(k - 1)],
                        k * p.alpha() / td)) {
                ok = false;
                why << "delta=" << p.delta() << ": s_" << k << " != k*alpha/(tau-delta); ";
            }
        }
    }
    verdict(3, ok, "closed-form ladder oracle matches the engine",
            ok ? "1000 sample times per case, max abs error < 1e-9" : why.str());
}

// ---- criterion 4: outcome classes against engine behavior ------------------

void criterion_4() {
    bool ok = true;
    std::ostringstream why;

    {
        const ModelParams p(0.3, kAlphaPi, 1.0, 1.0);
        const OutcomeReport rep = classify(p);
        const LimitTrajectory traj = run_limit(p, {.t_max = 5.0});
        const auto back = first_reemergence_time(traj, 0);
        if (rep.classification != OutcomeClass::ReemergenceOfZero) {
            ok = false;
            why << "case 1 class " << outcome_class_name(rep.classification) << "; ";
        } else if (!back || !rel_eq(*back, *rep.tau_bar)) {
            ok = false;
            why << "tau_bar " << *rep.tau_bar << " vs engine "
                << (back ? *back : -1.0) << "; ";
        }
    }
    {
        const ModelParams p(0.41, kAlphaPi, 2.8, 1.0);
        const OutcomeReport rep = classify(p);
        const LimitTrajectory traj = run_limit(p, {.t_max = 8.0});
        if (rep.classification != OutcomeClass::EvolutionarySuicide) {
            ok = false;
            why << "case 2 class " << outcome_class_name(rep.classification) << "; ";
        }
        if (traj.termination.kind != TerminationKind::GlobalExtinction) {
            ok = false;
            why << "case 2: engine did not go extinct; ";
        }
        if (first_reemergence_time(traj, 0)) {
            ok = false;
            why << "case 2: trait 0 re-emerged before extinction; ";
        }
    }
    {
        const ModelParams p(0.8, 0.3, 1.9, 1.0);
        const OutcomeReport rep = classify(p);
        const LimitTrajectory traj = run_limit(p, {.t_max = 4.0});
        if (rep.classification != OutcomeClass::SubKReemergence) {
            ok = false;
            why << "case 3 class " << outcome_class_name(rep.classification) << "; ";
        } else {
            const auto [dip, at] = min_max_exponent(traj, 0.0, 4.0);
            std::optional<double> t_re;  // max exponent back at 1 after the dip
            for (const auto& seg : traj.segments) {
                if (seg.t_end <= at) continue;
                double m = 0.0;
                for (std::size_t l = 0; l < seg.beta_start.size(); ++l)
                    m = std::max(m, seg.beta_start[l] +
                                        seg.slopes[l] * (seg.t_end - seg.t_start));
                if (m >= 1.0 - 1e-9) {
                    t_re = seg.t_end;
                    break;
                }
            }
            if (!(dip < 1.0 - 1e-6)) {
                ok = false;
                why << "case 3: every exponent path stays at 1 (min " << dip << "); ";
            } else if (!t_re) {
                ok = false;
                why << "case 3: no recovery to K after the dip; ";
            }
        }
    }
    verdict(4, ok, "outcome classes cross-checked against the engine",
            ok ? "re-emergence, suicide, sub-K dip all confirmed" : why.str());
}

// ---- criterion 5: finite-K convergence toward the limit --------------------

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream why, note;

    const ModelParams p(1.4, kAlphaPi, 1.5, 1.0);
    const double s1 = 10.0 * kAlphaPi;
    const double window = 0.9 * s1;
    const LimitTrajectory traj = run_limit(p, {.t_max = s1});

    const std::int64_t Ks[] = {1000, 10000, 100000};
    std::vector<double> errs;
    EnsembleSummary last;
    for (std::int64_t K : Ks) {
        SimConfig cfg(p);
        cfg.K = K;
        cfg.seed = 20260817;
        cfg.horizon_logk = window;
        cfg.record_grid = step_grid(window, 0.02);
        cfg.replicas = 20;
        EnsembleSummary ens = ensemble(cfg, &traj, worker_threads());
        errs.push_back(ens.median_sup_error);
        if (K == 100000) last = std::move(ens);
    }
    note << fmt("median sup errors %.4f / %.4f / %.4f", errs[0], errs[1], errs[2]);
    if (!(errs[0] > errs[1] && errs[1] > errs[2])) {
        ok = false;
        why << "sup errors not strictly decreasing ("
            << errs[0] << ", " << errs[1] << ", " << errs[2] << "); ";
    }

    // crossing estimate of median beta_1 over beta_0 at K = 1e5
    std::optional<double> cross;
    for (std::size_t i = 0; i + 1 < last.grid.size(); ++i) {
        const double f0 = last.median[i][1] - last.median[i][0];
        const double f1 = last.median[i + 1][1] - last.median[i + 1][0];
        if (f0 < 0.0 && f1 >= 0.0) {
            cross = last.grid[i] - f0 * (last.grid[i + 1] - last.grid[i]) / (f1 - f0);
            break;
        }
    }
    if (!cross) {
        ok = false;
        why << "no beta_1/beta_0 crossing inside [0, 0.9*s1] (window ends at "
            << window << " < s1 = " << s1 << "); ";
    } else {
        note << fmt("; crossing at t=%.4f, |t - s1| = %.4f", *cross,
                    std::abs(*cross - s1));
        if (std::abs(*cross - s1) > 0.1) {
            ok = false;
            why << fmt("crossing at t=%.4f departs from s1=%.4f by %.4f > 0.1 "
                       "(window [0, 0.9*s1] ends before s1); ",
                       *cross, s1, std::abs(*cross - s1));
        }
    }

    note << fmt("; %.1fs", seconds_since(t0));
    verdict(5, ok, "finite-K exponents converge to the limit",
            ok ? note.str() : why.str() + "| " + note.str());
}

// ---- criterion 6: resident equilibrium under the full dynamics -------------

void criterion_6() {
    bool ok = true;
    std::ostringstream why;

    for (double tau : {0.0, 1.0}) {
        const ModelParams p(1.4, 0.8, tau, 0.5);
        SimConfig cfg(p);
        cfg.K = 10000;
        cfg.seed = 7117;
        cfg.horizon_logk = 10.0;
        cfg.record_grid = step_grid(10.0, 0.01);
        const SimTrace tr = run(cfg);

        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < tr.grid.size(); ++i) {
            if (tr.grid[i] < 2.0) continue;
            sum += static_cast<double>(tr.counts_at[i][0]) / static_cast<double>(cfg.K);
            ++n;
        }
        const double avg = sum / static_cast<double>(n);
        if (std::abs(avg - 6.0) > 0.03 * 6.0) {
            ok = false;
            why << "tau=" << tau << ": time-average N_0/K = " << avg
                << " departs from 6 by more than 3%; ";
        }
    }
    verdict(6, ok, "resident sits at its equilibrium mass 3K/C",
            ok ? "time-average N_0/K within 3% of 6 for tau in {0, 1}" : why.str());
}

// ---- criterion 7: immigration-process moments vs Monte Carlo ---------------

struct Moments {
    double mean = 0.0, var = 0.0, se_mean = 0.0, se_var = 0.0;
};

Moments mc_terminal(const BPIParams& p, double t_abs, int R, std::uint64_t seed) {
    const double t_end = t_abs / std::log(static_cast<double>(p.K));
    std::vector<double> x(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
        const std::uint64_t s = replica_seed(seed, static_cast<std::uint64_t>(i));
        x[static_cast<std::size_t>(i)] =
            static_cast<double>(bpi_simulate(p, t_end, s).terminal);
    }
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= R;
    double m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - m.mean) * (v - m.mean);
        m.var += d2;
        m4 += d2 * d2;
    }
    m.var /= R - 1;
    m4 /= R;
    m.se_mean = std::sqrt(m.var / R);
    const double var_of_var = std::max(m4 - m.var * m.var * (R - 3.0) / (R - 1.0), 0.0);
    m.se_var = std::sqrt(var_of_var / R);
    return m;
}

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream why;

    int cells = 0;
    for (std::int64_t K : {100, 1000}) {
        for (double b : {0.5, 1.0, 1.5}) {
            for (double a : {-0.5, 0.0, 0.5}) {
                BPIParams p;
                p.b = b;
                p.d = 1.0;
                p.a = a;
                p.c = 0.2;
                p.K = K;
                p.beta = std::log(7.0) / std::log(static_cast<double>(K));
                const double t = 1.0;
                const Moments mc = mc_terminal(p, t, 10000, 64000 + cells);
                const double want_mean = bpi_mean(p, t);
                const double want_var = bpi_variance(p, t);
                if (std::abs(mc.mean - want_mean) > 3.0 * mc.se_mean + 1e-9) {
                    ok = false;
                    why << "mean off at K=" << K << " r=" << b - 1.0 << " a=" << a
                        << " (" << mc.mean << " vs " << want_mean << "); ";
                }
                if (std::abs(mc.var - want_var) > 3.0 * mc.se_var + 1e-9) {
                    ok = false;
                    why << "variance off at K=" << K << " r=" << b - 1.0 << " a=" << a
                        << " (" << mc.var << " vs " << want_var << "); ";
                }
                ++cells;
            }
        }
    }

    // branch continuity at parameter distance 1e-6 from the r = a diagonal
    BPIParams at;
    at.b = 1.5;
    at.d = 1.0;
    at.a = 0.5;
    at.c = 0.2;
    at.beta = 0.5;
    at.K = 100;
    for (double shift : {1e-6, -1e-6}) {
        BPIParams off = at;
        off.a = at.a + shift;
        for (double t : {0.1, 0.25}) {
            const double dm =
                std::abs(bpi_mean(off, t) - bpi_mean(at, t)) / bpi_mean(at, t);
            const double dv = std::abs(bpi_variance(off, t) - bpi_variance(at, t)) /
                              bpi_variance(at, t);
            if (dm > 1e-6 || dv > 1e-6) {
                ok = false;
                why << "branch discontinuity at t=" << t << " (mean " << dm
                    << ", var " << dv << "); ";
            }
        }
    }

    verdict(7, ok, "immigration-process moments match Monte Carlo",
            ok ? fmt("18 cells within 3 SE, branch continuity 1e-6, %.1fs",
                     seconds_since(t0))
               : why.str());
}

// ---- criterion 8: extinction law of the plain branching process ------------

void criterion_8() {
    bool ok = true;
    std::ostringstream why;

    BPIParams p;
    p.b = 1.0;
    p.d = 2.0;
    p.K = 100;
    p.beta = std::log(2.0) / std::log(100.0);  // exactly one ancestor
    p.immigration = false;
    const double t_end = 1.0 / std::log(100.0);  // absolute time 1

    const int R = 100000;
    int alive = 0;
    for (int i = 0; i < R; ++i) {
        const std::uint64_t s = replica_seed(4242, static_cast<std::uint64_t>(i));
        if (bpi_simulate(p, t_end, s).terminal > 0) ++alive;
    }
    const double frac = static_cast<double>(alive) / R;
    const double want = bp_survival(1.0, 2.0, 1.0);
    if (std::abs(frac - want) > 0.004) {
        ok = false;
        why << "survival fraction " << frac << " vs " << want << "; ";
    }
    verdict(8, ok, "extinction law of the subcritical process",
            ok ? fmt("survival %.5f vs %.5f over 1e5 paths", frac, want) : why.str());
}

// ---- criterion 9: structural invariants -------------------------------------

void criterion_9() {
    bool ok = true;
    std::ostringstream why;

    // fitness antisymmetry on every index pair
    for (const ModelParams& p :
         {ModelParams(1.4, kAlphaPi, 1.5, 1.0), ModelParams(0.3, 0.32, 1.0, 2.0),
          ModelParams(1.9, 0.4, 3.43, 0.5)}) {
        for (int i = 0; i <= p.num_traits(); ++i)
            for (int j = 0; j <= p.num_traits(); ++j)
                if (fitness_resident(p, i, j) != -fitness_resident(p, j, i)) {
                    ok = false;
                    why << "fitness not antisymmetric at (" << i << "," << j << "); ";
                }
    }

    // engine exponents stay in [0,1] and move continuously, random generic sets
    std::mt19937_64 gen(1234501);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    int accepted = 0;
    while (accepted < 200) {
        const double delta = 0.15 + 1.75 * ud(gen);
        const double alpha = 0.05 + 0.9 * ud(gen);
        const double tau = 0.05 + 2.85 * ud(gen);
        const ModelParams p(delta, alpha, tau, 1.0);
        if (!genericity_check(p).ok) continue;
        ++accepted;
        const LimitTrajectory traj = run_limit(p, {.t_max = 6.0});
        for (const auto& seg : traj.segments) {
            const double len = seg.t_end - seg.t_start;
            for (std::size_t l = 0; l < seg.beta_start.size(); ++l) {
                const double v0 = seg.beta_start[l];
                const double v1 = v0 + seg.slopes[l] * len;
                if (v0 < -1e-12 || v0 > 1.0 + 1e-12 || v1 < -1e-12 || v1 > 1.0 + 1e-12) {
                    ok = false;
                    why << "exponent leaves [0,1] at delta=" << delta << "; ";
                }
            }
        }
        for (std::size_t s = 0; s + 1 < traj.segments.size(); ++s) {
            const auto& cur = traj.segments[s];
            const auto& nxt = traj.segments[s + 1];
            const double len = cur.t_end - cur.t_start;
            for (std::size_t l = 0; l < cur.beta_start.size(); ++l) {
                const double end_v = cur.beta_start[l] + cur.slopes[l] * len;
                if (std::abs(end_v - nxt.beta_start[l]) > 1e-12) {
                    ok = false;
                    why << "exponent jump at segment " << s << " (delta=" << delta
                        << "); ";
                }
            }
        }
    }

    // event conservation over 1e6 exact jumps
    const ModelParams p(1.4, kAlphaPi, 1.5, 1.0);
    Xoshiro256pp rng(90210);
    PopulationState st;
    st.counts = initial_condition(p, 500.0);
    for (int i = 0; i < 1000000; ++i) {
        const PopulationState next = step(st, p, 500, rng);
        const std::int64_t dn = next.total() - st.total();
        if (dn < -1 || dn > 1 || next.t < st.t) {
            ok = false;
            why << "conservation breaks at event " << i << "; ";
            break;
        }
        for (auto c : next.counts)
            if (c < 0) {
                ok = false;
                why << "negative count at event " << i << "; ";
            }
        st = next;
        if (st.total() == 0) st.counts = initial_condition(p, 500.0);
    }

    verdict(9, ok, "structural invariants",
            ok ? "antisymmetry, bounded continuous exponents, event conservation"
               : why.str());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
