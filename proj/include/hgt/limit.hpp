#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hgt/model.hpp"
#include "hgt/numeric.hpp"

namespace hgt {

// Log-scale population exponents evolve piecewise affinely: within a phase the
// dominant trait lstar fixes every per-capita growth rate, slopes change at a
// finite set of events, and phases are delimited by changes of the argmax.

enum class EventKind {
    DominanceChange,          // another trait's exponent reaches the dominant one
    SubpopulationExtinction,  // an exponent hits zero
    MutationFlowTakeover,     // an exponent lands on the incoming mutation line
    DominantBecomesResident,  // the dominant exponent reaches one
    GlobalExtinction,         // the dominant exponent hits zero
    T0TripleArgmax,           // construction stops: non-unique next dominant
    T0ExtinctionAtTransition, // construction stops: extinction at a phase boundary
    Horizon                   // reached the requested end time
};

struct EventRecord {
    EventKind kind;
    int trait;  // trait the event acts on, -1 when not applicable
};

struct ExponentState {
    double t = 0.0;
    std::vector<double> beta;
    int lstar = 0;
    bool resident = true;  // dominant exponent is 1 and its trait has positive equilibrium
    int phase = 1;
};

struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> beta_start;
    std::vector<double> slopes;
    int lstar = 0;
    bool resident = true;
    EventKind end_event = EventKind::Horizon;
    std::vector<EventRecord> events;  // every simultaneous event closing the segment
};

enum class TerminationKind {
    Horizon,
    GlobalExtinction,
    T0TripleArgmax,
    T0ExtinctionAtTransition
};

struct Termination {
    TerminationKind kind = TerminationKind::Horizon;
    double time = 0.0;
};

struct LimitTrajectory {
    ModelParams params;
    std::vector<Segment> segments;
    std::vector<double> phase_times;     // s_1, s_2, ... (boundary crossing times)
    std::vector<int> dominant_indices;   // dominant trait per phase, starting with phase 1
    Termination termination;
};

struct EngineOptions {
    double t_max = 10.0;
    bool strict = false;           // reject parameters failing the genericity screen
    double tol = kTol;             // exponent and tie comparison tolerance
    std::size_t max_segments = 1000000;
};

inline std::vector<double> initial_exponents(const ModelParams& p) {
    const int L = p.num_traits();
    std::vector<double> beta(static_cast<std::size_t>(L) + 1, 0.0);
    beta[0] = 1.0;
    for (int ell = 1; ell <= L; ++ell) {
        const double v = 1.0 - ell * p.alpha();
        beta[static_cast<std::size_t>(ell)] = v > kTol ? v : 0.0;
    }
    return beta;
}

inline ExponentState initial_state(const ModelParams& p) {
    ExponentState s;
    s.beta = initial_exponents(p);
    s.lstar = 0;
    s.resident = true;  // trait 0 starts at its equilibrium mass
    s.phase = 1;
    return s;
}

// Per-capita growth rate of trait ell in the current regime.
inline double effective_fitness(const ModelParams& p, const ExponentState& st, int ell) {
    return st.resident ? fitness_resident(p, ell, st.lstar)
                       : fitness_dominant(p, ell, st.lstar);
}

// Slopes of the exponents on the segment starting at st. A trait riding the
// mutation line beta[l-1] - alpha moves at the faster of its own fitness and
// the line; an exponent at zero only moves if the line above it sits at alpha
// and pushes upward.
inline std::vector<double> slope_vector(const ModelParams& p, const ExponentState& st,
                                        double tol = kTol) {
    const int L = p.num_traits();
    const double alpha = p.alpha();
    std::vector<double> slopes(static_cast<std::size_t>(L) + 1, 0.0);
    double sigma_prev = 0.0;
    for (int ell = 0; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        double sigma = effective_fitness(p, st, ell);
        const bool on_line =
            ell >= 1 && std::abs(st.beta[i] - (st.beta[i - 1] - alpha)) <= tol;
        if (on_line) sigma = std::max(sigma, sigma_prev);
        const bool fed = ell >= 1 && std::abs(st.beta[i - 1] - alpha) <= tol;
        double s0 = (st.beta[i] > tol || fed) ? sigma : 0.0;
        if (st.beta[i] <= tol && s0 < 0.0) s0 = 0.0;  // exponents never go below zero
        slopes[i] = s0;
        sigma_prev = sigma;
    }
    return slopes;
}

struct PendingEvent {
    double dt = 0.0;
    std::vector<EventRecord> records;
};

// Earliest slope-changing event from st under the given slopes, together with
// everything else landing at the same time. Empty when the motion is affine
// forever (no event ahead).
inline std::optional<PendingEvent> next_event(const ModelParams& p, const ExponentState& st,
                                              const std::vector<double>& slopes,
                                              double tol = kTol) {
    const int L = p.num_traits();
    const double alpha = p.alpha();
    const auto dom = static_cast<std::size_t>(st.lstar);
    struct Cand {
        double dt;
        EventRecord rec;
    };
    std::vector<Cand> cands;

    // another exponent reaches the dominant one
    for (int ell = 0; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        if (ell == st.lstar) continue;
        const double d = slopes[i] - slopes[dom];
        if (d <= tol) continue;
        const double gap = st.beta[dom] - st.beta[i];
        if (gap < -tol) continue;
        cands.push_back({std::max(gap, 0.0) / d, {EventKind::DominanceChange, ell}});
    }
    // an exponent hits zero
    for (int ell = 0; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        if (st.beta[i] <= tol || slopes[i] >= -tol) continue;
        const auto kind = ell == st.lstar ? EventKind::GlobalExtinction
                                          : EventKind::SubpopulationExtinction;
        cands.push_back({st.beta[i] / (-slopes[i]), {kind, ell}});
    }
    // an exponent lands on the mutation line below it
    for (int ell = 1; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        if (ell == st.lstar) continue;
        const double gap = st.beta[i] - (st.beta[i - 1] - alpha);
        if (gap <= tol) continue;  // already on or below the line
        const double g = slopes[i - 1] - slopes[i];
        if (g <= tol) continue;
        cands.push_back({gap / g, {EventKind::MutationFlowTakeover, ell}});
    }
    // the dominant exponent reaches one
    if (slopes[dom] > tol && st.beta[dom] < 1.0 - tol)
        cands.push_back(
            {(1.0 - st.beta[dom]) / slopes[dom], {EventKind::DominantBecomesResident, st.lstar}});

    if (cands.empty()) return std::nullopt;
    double dt_min = cands[0].dt;
    for (const auto& c : cands) dt_min = std::min(dt_min, c.dt);
    PendingEvent ev;
    ev.dt = dt_min;
    // Merge only events coinciding up to rounding; anything further apart is a
    // genuinely later event and gets its own segment.
    const double window = 1e-14 * std::max(1.0, std::abs(dt_min));
    for (const auto& c : cands)
        if (c.dt <= dt_min + window) ev.records.push_back(c.rec);
    return ev;
}

namespace detail {

inline EventKind primary_kind(const std::vector<EventRecord>& recs) {
    auto rank = [](EventKind k) {
        switch (k) {
            case EventKind::GlobalExtinction: return 0;
            case EventKind::T0TripleArgmax: return 1;
            case EventKind::T0ExtinctionAtTransition: return 2;
            case EventKind::DominanceChange: return 3;
            case EventKind::DominantBecomesResident: return 4;
            case EventKind::SubpopulationExtinction: return 5;
            case EventKind::MutationFlowTakeover: return 6;
            case EventKind::Horizon: return 7;
        }
        return 7;
    };
    EventKind best = recs.front().kind;
    for (const auto& r : recs)
        if (rank(r.kind) < rank(best)) best = r.kind;
    return best;
}

}  // namespace detail

// Apply one composite event at st.t + ev.dt. Returns the termination when the
// construction stops there. Mutates st into the state opening the next segment
// and rewrites ev.records with any stop upgraded.
inline std::optional<Termination> advance(const ModelParams& p, ExponentState& st,
                                          const std::vector<double>& slopes, PendingEvent& ev,
                                          double tol = kTol) {
    const double delta = p.delta();
    st.t += ev.dt;
    for (std::size_t i = 0; i < st.beta.size(); ++i) st.beta[i] += slopes[i] * ev.dt;

    bool crossing = false;
    bool side_extinction = false;
    bool dominant_zero = false;
    for (const auto& r : ev.records) {
        switch (r.kind) {
            case EventKind::SubpopulationExtinction:
                st.beta[static_cast<std::size_t>(r.trait)] = 0.0;
                side_extinction = true;
                break;
            case EventKind::GlobalExtinction:
                dominant_zero = true;
                break;
            case EventKind::DominanceChange:
                crossing = true;
                break;
            default:
                break;
        }
    }

    const auto dom = static_cast<std::size_t>(st.lstar);
    if (dominant_zero || (crossing && st.beta[dom] <= tol)) {
        // the dominant exponent dies: everything below it dies with it
        std::fill(st.beta.begin(), st.beta.end(), 0.0);
        st.resident = false;
        ev.records.push_back({EventKind::GlobalExtinction, st.lstar});
        return Termination{TerminationKind::GlobalExtinction, st.t};
    }

    if (crossing) {
        if (side_extinction) {
            ev.records.push_back({EventKind::T0ExtinctionAtTransition, -1});
            return Termination{TerminationKind::T0ExtinctionAtTransition, st.t};
        }
        for (const auto& r : ev.records)
            if (r.kind == EventKind::DominanceChange)
                st.beta[static_cast<std::size_t>(r.trait)] = st.beta[dom];
        int best = -1;
        for (int ell = 0; ell < static_cast<int>(st.beta.size()); ++ell) {
            if (ell == st.lstar) continue;
            if (best < 0 || st.beta[static_cast<std::size_t>(ell)] >
                                st.beta[static_cast<std::size_t>(best)])
                best = ell;
        }
        int ties = 0;
        for (int ell = 0; ell < static_cast<int>(st.beta.size()); ++ell) {
            if (ell == st.lstar) continue;
            if (st.beta[static_cast<std::size_t>(ell)] >=
                st.beta[static_cast<std::size_t>(best)] - tol)
                ++ties;
        }
        if (ties > 1) {
            ev.records.push_back({EventKind::T0TripleArgmax, -1});
            return Termination{TerminationKind::T0TripleArgmax, st.t};
        }
        st.lstar = best;
        st.phase += 1;
    }

    // land exactly on the mutation line (after crossing values are pinned)
    for (const auto& r : ev.records)
        if (r.kind == EventKind::MutationFlowTakeover) {
            const auto i = static_cast<std::size_t>(r.trait);
            st.beta[i] = std::max(0.0, st.beta[i - 1] - p.alpha());
        }

    for (const auto& r : ev.records)
        if (r.kind == EventKind::DominantBecomesResident)
            st.beta[static_cast<std::size_t>(st.lstar)] = 1.0;

    // The engine only ever produces a dominant exponent exactly at one, so a
    // tight threshold keeps the pin below the continuity budget.
    st.resident = st.beta[static_cast<std::size_t>(st.lstar)] >= 1.0 - 1e-12 &&
                  st.lstar * delta < 3.0;
    if (st.resident) st.beta[static_cast<std::size_t>(st.lstar)] = 1.0;
    return std::nullopt;
}

inline LimitTrajectory run_limit(const ModelParams& p, const EngineOptions& opt = {}) {
    if (!(opt.t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
    if (opt.strict) {
        const auto rep = genericity_check(p, opt.tol);
        if (!rep.ok) {
            std::string msg = "parameters fail the genericity screen:";
            for (const auto& v : rep.violations) msg += " " + v + ";";
            throw std::domain_error(msg);
        }
    }

    LimitTrajectory traj{p, {}, {}, {}, {}};
    ExponentState st = initial_state(p);
    traj.dominant_indices.push_back(st.lstar);

    int stalls = 0;
    while (true) {
        if (traj.segments.size() >= opt.max_segments)
            throw std::runtime_error("segment budget exhausted; dynamics did not settle");
        std::vector<double> slopes = slope_vector(p, st, opt.tol);
        auto ev = next_event(p, st, slopes, opt.tol);

        Segment seg;
        seg.t_start = st.t;
        seg.beta_start = st.beta;
        seg.slopes = slopes;
        seg.lstar = st.lstar;
        seg.resident = st.resident;

        const double room = opt.t_max - st.t;
        if (!ev || ev->dt > room) {
            seg.t_end = opt.t_max;
            seg.end_event = EventKind::Horizon;
            seg.events.push_back({EventKind::Horizon, -1});
            st.t = opt.t_max;
            traj.segments.push_back(std::move(seg));
            traj.termination = {TerminationKind::Horizon, opt.t_max};
            return traj;
        }

        if (ev->dt <= 1e-15 * std::max(1.0, st.t)) {
            if (++stalls > 2 * (p.num_traits() + 2))
                throw std::runtime_error("event loop stalled at t=" + std::to_string(st.t));
        } else {
            stalls = 0;
        }

        const int phase_before = st.phase;
        auto stop = advance(p, st, slopes, *ev, opt.tol);
        seg.t_end = st.t;
        seg.events = ev->records;
        seg.end_event = detail::primary_kind(ev->records);
        traj.segments.push_back(std::move(seg));

        if (st.phase != phase_before) {
            traj.phase_times.push_back(st.t);
            traj.dominant_indices.push_back(st.lstar);
        }

        if (stop) {
            traj.termination = *stop;
            if (stop->kind == TerminationKind::GlobalExtinction) {
                traj.phase_times.push_back(st.t);
                if (st.t < opt.t_max) {
                    Segment zero;
                    zero.t_start = st.t;
                    zero.t_end = opt.t_max;
                    zero.beta_start.assign(st.beta.size(), 0.0);
                    zero.slopes.assign(st.beta.size(), 0.0);
                    zero.lstar = st.lstar;
                    zero.resident = false;
                    zero.end_event = EventKind::Horizon;
                    zero.events.push_back({EventKind::Horizon, -1});
                    traj.segments.push_back(std::move(zero));
                }
            }
            return traj;
        }
        if (st.t >= opt.t_max - 1e-15 * std::max(1.0, opt.t_max)) {
            traj.termination = {TerminationKind::Horizon, st.t};
            return traj;
        }
    }
}

struct SampleRow {
    double t = 0.0;
    std::vector<double> beta;
    int lstar = 0;
    bool resident = false;
};

inline SampleRow sample_limit(const LimitTrajectory& traj, double t) {
    if (traj.segments.empty()) throw std::out_of_range("empty trajectory");
    if (t < 0.0) throw std::out_of_range("sample time before start");
    const double t_end = traj.segments.back().t_end;
    if (t > t_end + 1e-12 * std::max(1.0, t_end)) {
        if (traj.termination.kind == TerminationKind::GlobalExtinction) {
            SampleRow row;
            row.t = t;
            row.beta.assign(traj.segments.back().beta_start.size(), 0.0);
            row.lstar = traj.segments.back().lstar;
            row.resident = false;
            return row;
        }
        throw std::out_of_range("sample time beyond trajectory");
    }
    // Right-continuous: a phase boundary reports the segment that starts there.
    auto it = std::upper_bound(
        traj.segments.begin(), traj.segments.end(), t,
        [](double v, const Segment& s) { return v < s.t_end; });
    if (it == traj.segments.end()) it = std::prev(traj.segments.end());
    SampleRow row;
    row.t = t;
    row.lstar = it->lstar;
    row.resident = it->resident;
    const double dt = std::min(t, it->t_end) - it->t_start;
    row.beta.resize(it->beta_start.size());
    for (std::size_t i = 0; i < row.beta.size(); ++i)
        row.beta[i] = it->beta_start[i] + it->slopes[i] * std::max(dt, 0.0);
    return row;
}

inline std::vector<SampleRow> sample_limit(const LimitTrajectory& traj,
                                           const std::vector<double>& times) {
    std::vector<SampleRow> rows;
    rows.reserve(times.size());
    for (double t : times) rows.push_back(sample_limit(traj, t));
    return rows;
}

}  // namespace hgt
