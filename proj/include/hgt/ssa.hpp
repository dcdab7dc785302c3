#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hgt/limit.hpp"
#include "hgt/model.hpp"
#include "hgt/rng.hpp"

namespace hgt {

// Exact jump-chain simulation of the finite-K process: births with upward
// mutation probability K^{-alpha}, logistic deaths through the total
// population, and unilateral transfer converting a lower-trait individual to
// the donor's trait. Time inside the simulation is absolute; all interfaces
// speak log-K units.

struct PopulationState {
    double t = 0.0;  // absolute model time
    std::vector<std::int64_t> counts;

    std::int64_t total() const {
        std::int64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

struct SimConfig {
    explicit SimConfig(ModelParams p) : params(p) {}

    ModelParams params;
    std::int64_t K = 2;
    std::uint64_t seed = 1;
    double horizon_logk = 1.0;
    std::vector<double> record_grid;  // log-K times, strictly increasing
    int replicas = 1;
    std::uint64_t event_budget = 10'000'000'000ull;
    bool disable_mutation = false;  // force the mutation probability to zero
    std::optional<std::vector<std::int64_t>> initial_counts;  // default: paper's seeding
};

struct SimTrace {
    std::vector<double> grid;  // log-K times actually recorded
    std::vector<std::vector<std::int64_t>> counts_at;
    std::vector<std::vector<double>> exponents_at;
    std::optional<double> extinction_logk;
    std::uint64_t events_executed = 0;
    bool truncated = false;  // event budget ran out; trace stops early

    friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

inline std::vector<double> exponents(const std::vector<std::int64_t>& counts,
                                     std::int64_t K) {
    if (K < 2) throw std::invalid_argument("exponent scale needs K >= 2");
    const double logK = std::log(static_cast<double>(K));
    std::vector<double> beta(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        beta[i] = std::log1p(static_cast<double>(counts[i])) / logK;
    return beta;
}

struct TransferChannel {
    int donor;      // higher trait
    int recipient;  // lower trait, converted to the donor's trait
    double rate;
};

struct RateTable {
    std::vector<double> clone_birth;   // N_l * b_l * (1 - p_K)
    std::vector<double> mutant_birth;  // N_l * b_l * p_K (0 at the top trait)
    std::vector<double> death;         // N_l * (1 + C*N/K)
    std::vector<TransferChannel> transfer;
    double total = 0.0;
};

inline RateTable event_rates(const PopulationState& state, const ModelParams& p,
                             std::int64_t K, bool disable_mutation = false) {
    const int L = p.num_traits();
    if (state.counts.size() != static_cast<std::size_t>(L) + 1)
        throw std::invalid_argument("state has the wrong number of traits");
    const double N = static_cast<double>(state.total());
    const double pmut =
        disable_mutation ? 0.0
                         : std::exp(-p.alpha() * std::log(static_cast<double>(K)));
    RateTable tab;
    tab.clone_birth.resize(static_cast<std::size_t>(L) + 1, 0.0);
    tab.mutant_birth.resize(static_cast<std::size_t>(L) + 1, 0.0);
    tab.death.resize(static_cast<std::size_t>(L) + 1, 0.0);
    const double death_per_head =
        1.0 + p.comp() * N / static_cast<double>(K);
    for (int ell = 0; ell <= L; ++ell) {
        const auto i = static_cast<std::size_t>(ell);
        const double n = static_cast<double>(state.counts[i]);
        const double b = n * birth_rate(p, ell);
        const bool can_mutate = ell < L;
        tab.clone_birth[i] = can_mutate ? b * (1.0 - pmut) : b;
        tab.mutant_birth[i] = can_mutate ? b * pmut : 0.0;
        tab.death[i] = n * death_per_head;
        tab.total += b + tab.death[i];
    }
    if (p.tau() > 0.0 && N > 0.0) {
        for (int donor = 1; donor <= L; ++donor)
            for (int rec = 0; rec < donor; ++rec) {
                const double nd =
                    static_cast<double>(state.counts[static_cast<std::size_t>(donor)]);
                const double nr =
                    static_cast<double>(state.counts[static_cast<std::size_t>(rec)]);
                if (nd == 0.0 || nr == 0.0) continue;
                const double rate = p.tau() * nd * nr / N;
                tab.transfer.push_back({donor, rec, rate});
                tab.total += rate;
            }
    }
    return tab;
}

// One exact jump from the current state; N changes by +1 (birth), -1 (death)
// or 0 (transfer). Absorbing when empty.
inline PopulationState step(const PopulationState& state, const ModelParams& p,
                            std::int64_t K, Xoshiro256pp& rng,
                            bool disable_mutation = false) {
    if (state.total() == 0) return state;
    const auto tab = event_rates(state, p, K, disable_mutation);
    PopulationState out = state;
    out.t += rng.exponential(tab.total);
    double u = rng.uniform() * tab.total;
    for (std::size_t i = 0; i < tab.clone_birth.size(); ++i) {
        if (u < tab.clone_birth[i]) {
            out.counts[i] += 1;
            return out;
        }
        u -= tab.clone_birth[i];
    }
    for (std::size_t i = 0; i < tab.mutant_birth.size(); ++i) {
        if (u < tab.mutant_birth[i]) {
            out.counts[i + 1] += 1;
            return out;
        }
        u -= tab.mutant_birth[i];
    }
    for (std::size_t i = 0; i < tab.death.size(); ++i) {
        if (u < tab.death[i]) {
            out.counts[i] -= 1;
            return out;
        }
        u -= tab.death[i];
    }
    for (const auto& ch : tab.transfer) {
        if (u < ch.rate) {
            out.counts[static_cast<std::size_t>(ch.recipient)] -= 1;
            out.counts[static_cast<std::size_t>(ch.donor)] += 1;
            return out;
        }
        u -= ch.rate;
    }
    // rounding fell off the end: last nonempty death channel is always valid
    for (std::size_t i = out.counts.size(); i-- > 0;)
        if (out.counts[i] > 0) {
            out.counts[i] -= 1;
            return out;
        }
    return out;
}

inline SimTrace run(const SimConfig& cfg) {
    const ModelParams& p = cfg.params;
    const int L = p.num_traits();
    const auto W = static_cast<std::size_t>(L) + 1;
    if (cfg.K < 2) throw std::invalid_argument("simulation needs K >= 2");
    if (!(cfg.horizon_logk > 0.0))
        throw std::invalid_argument("horizon must be positive");
    for (std::size_t i = 0; i < cfg.record_grid.size(); ++i) {
        if (cfg.record_grid[i] < 0.0 || cfg.record_grid[i] > cfg.horizon_logk)
            throw std::invalid_argument("record grid leaves [0, horizon]");
        if (i > 0 && cfg.record_grid[i] <= cfg.record_grid[i - 1])
            throw std::invalid_argument("record grid must increase strictly");
    }

    const double logK = std::log(static_cast<double>(cfg.K));
    const double pmut =
        cfg.disable_mutation ? 0.0 : std::exp(-p.alpha() * logK);
    const double delta = p.delta(), tau = p.tau(), comp = p.comp();
    const auto Kd = static_cast<double>(cfg.K);

    std::vector<std::int64_t> counts;
    if (cfg.initial_counts) {
        counts = *cfg.initial_counts;
        if (counts.size() != W)
            throw std::invalid_argument("initial counts have the wrong length");
        for (auto c : counts)
            if (c < 0) throw std::invalid_argument("negative initial count");
    } else {
        counts = initial_condition(p, cfg.K);
    }

    std::int64_t N = 0, M1 = 0, S2 = 0;
    for (int ell = 0; ell <= L; ++ell) {
        const auto c = counts[static_cast<std::size_t>(ell)];
        N += c;
        M1 += ell * c;
        S2 += c * c;
    }

    Xoshiro256pp rng(cfg.seed);
    const double horizon_abs = cfg.horizon_logk * logK;
    std::vector<double> grid_abs(cfg.record_grid.size());
    for (std::size_t i = 0; i < grid_abs.size(); ++i)
        grid_abs[i] = cfg.record_grid[i] * logK;

    SimTrace trace;
    trace.grid.reserve(cfg.record_grid.size());
    std::size_t gi = 0;
    auto record_through = [&](double t_abs_cut, bool inclusive) {
        while (gi < grid_abs.size() &&
               (inclusive ? grid_abs[gi] <= t_abs_cut : grid_abs[gi] < t_abs_cut)) {
            trace.grid.push_back(cfg.record_grid[gi]);
            trace.counts_at.push_back(counts);
            trace.exponents_at.push_back(exponents(counts, cfg.K));
            ++gi;
        }
    };

    double t = 0.0;
    while (true) {
        if (N == 0) {
            trace.extinction_logk = t / logK;
            record_through(horizon_abs, true);
            break;
        }
        const double B = 4.0 * static_cast<double>(N) -
                         delta * static_cast<double>(M1);
        const double D = static_cast<double>(N) *
                         (1.0 + comp * static_cast<double>(N) / Kd);
        const double T =
            tau > 0.0 ? tau * static_cast<double>(N * N - S2) /
                            (2.0 * static_cast<double>(N))
                      : 0.0;
        const double R = B + D + T;

        const double dt = rng.exponential(R);
        if (t + dt > horizon_abs) {
            record_through(horizon_abs, true);
            t = horizon_abs;
            break;
        }
        if (trace.events_executed >= cfg.event_budget) {
            trace.truncated = true;
            break;
        }
        record_through(t + dt, false);
        t += dt;
        ++trace.events_executed;

        double u = rng.uniform() * R;
        if (u < B) {
            // birth; walk the per-trait birth weights
            int ell = -1;
            for (int j = 0; j <= L; ++j) {
                const double w = static_cast<double>(counts[static_cast<std::size_t>(j)]) *
                                 (4.0 - j * delta);
                if (u < w && w > 0.0) {
                    ell = j;
                    break;
                }
                u -= w;
            }
            if (ell < 0) {  // rounding; take the last populated trait
                for (int j = L; j >= 0; --j)
                    if (counts[static_cast<std::size_t>(j)] > 0) {
                        ell = j;
                        break;
                    }
            }
            const bool mutate = rng.uniform() < pmut && ell < L;
            const int tgt = mutate ? ell + 1 : ell;
            const auto ti = static_cast<std::size_t>(tgt);
            S2 += 2 * counts[ti] + 1;
            counts[ti] += 1;
            N += 1;
            M1 += tgt;
        } else if (u < B + D) {
            u -= B;
            const double per_head = 1.0 + comp * static_cast<double>(N) / Kd;
            int ell = -1;
            for (int j = 0; j <= L; ++j) {
                const double w =
                    static_cast<double>(counts[static_cast<std::size_t>(j)]) * per_head;
                if (u < w) {
                    ell = j;
                    break;
                }
                u -= w;
            }
            if (ell < 0) {  // rounding; take the last populated trait
                for (int j = L; j >= 0; --j)
                    if (counts[static_cast<std::size_t>(j)] > 0) {
                        ell = j;
                        break;
                    }
            }
            const auto i = static_cast<std::size_t>(ell);
            S2 += 1 - 2 * counts[i];
            counts[i] -= 1;
            N -= 1;
            M1 -= ell;
        } else {
            // transfer: donor with weight N_donor * (count below), then recipient
            double y = (u - B - D) * static_cast<double>(N) / tau;
            std::int64_t prefix = 0;
            int donor = -1;
            for (int j = 0; j <= L; ++j) {
                const auto nj = counts[static_cast<std::size_t>(j)];
                const double w =
                    static_cast<double>(nj) * static_cast<double>(prefix);
                if (y < w && w > 0.0) {
                    donor = j;
                    break;
                }
                y -= w;
                prefix += nj;
            }
            if (donor < 0) {
                for (int j = L; j >= 1; --j)
                    if (counts[static_cast<std::size_t>(j)] > 0) {
                        std::int64_t below = 0;
                        for (int q = 0; q < j; ++q)
                            below += counts[static_cast<std::size_t>(q)];
                        if (below > 0) {
                            donor = j;
                            break;
                        }
                    }
            }
            std::int64_t below = 0;
            for (int q = 0; q < donor; ++q) below += counts[static_cast<std::size_t>(q)];
            double z = rng.uniform() * static_cast<double>(below);
            int rec = -1;
            for (int q = 0; q < donor; ++q) {
                const double w = static_cast<double>(counts[static_cast<std::size_t>(q)]);
                if (z < w) {
                    rec = q;
                    break;
                }
                z -= w;
            }
            if (rec < 0) {
                for (int q = donor - 1; q >= 0; --q)
                    if (counts[static_cast<std::size_t>(q)] > 0) {
                        rec = q;
                        break;
                    }
            }
            const auto di = static_cast<std::size_t>(donor);
            const auto ri = static_cast<std::size_t>(rec);
            S2 += 2 * counts[di] + 1;
            counts[di] += 1;
            S2 += 1 - 2 * counts[ri];
            counts[ri] -= 1;
            M1 += donor - rec;
        }
    }
    return trace;
}

struct EnsembleSummary {
    std::vector<double> grid;
    std::vector<std::vector<double>> median, q25, q75;  // [grid][L+1]
    std::vector<double> sup_errors;  // per replica, vs the supplied trajectory
    double median_sup_error = std::numeric_limits<double>::quiet_NaN();
    std::vector<SimTrace> traces;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace detail

// Independent replicas with decorrelated seeds; medians and quartiles per
// grid point, plus each replica's sup-norm exponent error against a limit
// trajectory when one is supplied.
inline EnsembleSummary ensemble(const SimConfig& cfg,
                                const LimitTrajectory* limit = nullptr,
                                int threads = 1) {
    if (cfg.replicas < 1) throw std::invalid_argument("need at least one replica");
    const int R = cfg.replicas;
    EnsembleSummary out;
    out.traces.resize(static_cast<std::size_t>(R));

    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (int r = cursor.fetch_add(1); r < R; r = cursor.fetch_add(1)) {
            SimConfig mine = cfg;
            mine.seed = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
            out.traces[static_cast<std::size_t>(r)] = run(mine);
        }
    };
    const int nthread = std::max(1, std::min(threads, R));
    if (nthread == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthread));
        for (int i = 0; i < nthread; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& tr : out.traces)
        if (tr.truncated)
            throw std::runtime_error("event budget exhausted in a replica");

    out.grid = cfg.record_grid;
    const std::size_t G = out.grid.size();
    const std::size_t W =
        static_cast<std::size_t>(cfg.params.num_traits()) + 1;
    out.median.assign(G, std::vector<double>(W, 0.0));
    out.q25.assign(G, std::vector<double>(W, 0.0));
    out.q75.assign(G, std::vector<double>(W, 0.0));
    std::vector<double> pool(static_cast<std::size_t>(R));
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t l = 0; l < W; ++l) {
            for (int r = 0; r < R; ++r)
                pool[static_cast<std::size_t>(r)] =
                    out.traces[static_cast<std::size_t>(r)].exponents_at[g][l];
            std::sort(pool.begin(), pool.end());
            out.median[g][l] = detail::quantile_sorted(pool, 0.5);
            out.q25[g][l] = detail::quantile_sorted(pool, 0.25);
            out.q75[g][l] = detail::quantile_sorted(pool, 0.75);
        }

    if (limit != nullptr) {
        const auto rows = sample_limit(*limit, out.grid);
        out.sup_errors.resize(static_cast<std::size_t>(R), 0.0);
        for (int r = 0; r < R; ++r) {
            double sup = 0.0;
            for (std::size_t g = 0; g < G; ++g)
                for (std::size_t l = 0; l < W; ++l)
                    sup = std::max(
                        sup, std::abs(out.traces[static_cast<std::size_t>(r)]
                                          .exponents_at[g][l] -
                                      rows[g].beta[l]));
            out.sup_errors[static_cast<std::size_t>(r)] = sup;
        }
        auto sorted = out.sup_errors;
        std::sort(sorted.begin(), sorted.end());
        out.median_sup_error = detail::quantile_sorted(sorted, 0.5);
    }
    return out;
}

}  // namespace hgt
