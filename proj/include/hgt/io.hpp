#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hgt/limit.hpp"
#include "hgt/model.hpp"
#include "hgt/outcome.hpp"
#include "hgt/ssa.hpp"

namespace hgt {

using json = nlohmann::json;

// 17 significant digits: every double round-trips through its decimal form,
// so emitted tables are bit-exact across platforms.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void require_object(const json& j, const std::string& what) {
    if (!j.is_object())
        throw std::invalid_argument(what + " must be a JSON object");
}

inline void reject_unknown_keys(const json& j,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double require_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw std::invalid_argument(where + " is missing key \"" + key + "\"");
    const json& v = j.at(key);
    if (!v.is_number())
        throw std::invalid_argument(where + " key \"" + std::string(key) +
                                    "\" must be a number");
    return v.get<double>();
}

inline double get_number(const json& j, const char* key, double dflt,
                         const std::string& where) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_number())
        throw std::invalid_argument(where + " key \"" + std::string(key) +
                                    "\" must be a number");
    return v.get<double>();
}

inline std::int64_t get_integer(const json& j, const char* key, std::int64_t dflt,
                                const std::string& where) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw std::invalid_argument(where + " key \"" + std::string(key) +
                                    "\" must be an integer");
    return v.get<std::int64_t>();
}

inline bool get_flag(const json& j, const char* key, bool dflt, const std::string& where) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw std::invalid_argument(where + " key \"" + std::string(key) +
                                    "\" must be a boolean");
    return v.get<bool>();
}

}  // namespace detail

inline json params_to_json(const ModelParams& p) {
    return json{{"delta", p.delta()}, {"alpha", p.alpha()}, {"tau", p.tau()},
                {"C", p.comp()}};
}

inline ModelParams params_from_json(const json& j) {
    detail::require_object(j, "params");
    detail::reject_unknown_keys(j, {"delta", "alpha", "tau", "C"}, "params");
    return ModelParams(detail::require_number(j, "delta", "params"),
                       detail::require_number(j, "alpha", "params"),
                       detail::require_number(j, "tau", "params"),
                       detail::require_number(j, "C", "params"));
}

struct SimulateBlock {
    std::int64_t K = 1000;
    std::uint64_t seed = 1;
    double horizon_logk = 1.0;
    double grid_step = 0.01;
    int replicas = 1;
};

struct LimitBlock {
    double t_max = 10.0;
    bool strict = false;
    int samples = 201;
};

struct Scenario {
    ModelParams params;
    std::optional<SimulateBlock> simulate;
    std::optional<LimitBlock> limit;
    bool classify = false;

    explicit Scenario(ModelParams p) : params(p) {}
};

inline Scenario scenario_from_json(const json& j) {
    detail::require_object(j, "scenario");
    detail::reject_unknown_keys(j, {"params", "simulate", "limit", "classify"},
                                "scenario");
    if (!j.contains("params"))
        throw std::invalid_argument("scenario is missing key \"params\"");
    Scenario sc(params_from_json(j.at("params")));
    if (j.contains("simulate")) {
        const json& b = j.at("simulate");
        detail::require_object(b, "simulate");
        detail::reject_unknown_keys(
            b, {"K", "seed", "horizon_logk", "grid_step", "replicas"}, "simulate");
        SimulateBlock s;
        s.K = detail::get_integer(b, "K", s.K, "simulate");
        s.seed = static_cast<std::uint64_t>(
            detail::get_integer(b, "seed", static_cast<std::int64_t>(s.seed), "simulate"));
        s.horizon_logk = detail::get_number(b, "horizon_logk", s.horizon_logk, "simulate");
        s.grid_step = detail::get_number(b, "grid_step", s.grid_step, "simulate");
        s.replicas = static_cast<int>(
            detail::get_integer(b, "replicas", s.replicas, "simulate"));
        sc.simulate = s;
    }
    if (j.contains("limit")) {
        const json& b = j.at("limit");
        detail::require_object(b, "limit");
        detail::reject_unknown_keys(b, {"t_max", "strict", "samples"}, "limit");
        LimitBlock l;
        l.t_max = detail::get_number(b, "t_max", l.t_max, "limit");
        l.strict = detail::get_flag(b, "strict", l.strict, "limit");
        l.samples = static_cast<int>(detail::get_integer(b, "samples", l.samples, "limit"));
        sc.limit = l;
    }
    sc.classify = detail::get_flag(j, "classify", false, "scenario");
    if (!sc.simulate && !sc.limit && !sc.classify)
        throw std::invalid_argument(
            "scenario needs at least one of simulate, limit, classify");
    return sc;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
    }
}

inline Scenario parse_scenario(const std::string& path) {
    return scenario_from_json(read_json_file(path));
}

// Plain numeric CSV: header line plus %.17g cells, LF endings. Reading and
// re-emitting one of our own files reproduces it byte for byte.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

inline void write_csv(std::ostream& os, const CsvTable& tab) {
    for (std::size_t i = 0; i < tab.header.size(); ++i) {
        if (i) os << ',';
        os << tab.header[i];
    }
    os << '\n';
    for (const auto& row : tab.rows) {
        if (row.size() != tab.header.size())
            throw std::invalid_argument("CSV row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << format_g17(row[i]);
        }
        os << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

inline CsvTable read_csv(std::istream& is) {
    CsvTable tab;
    std::string line;
    if (!std::getline(is, line) || line.empty())
        throw std::invalid_argument("CSV input has no header");
    tab.header = detail::split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != tab.header.size())
            throw std::invalid_argument("CSV row width differs from header");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            // strtod instead of stod: subnormals parse as values, not errors
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (cell.empty() || end != begin + cell.size())
                throw std::invalid_argument("bad CSV number: \"" + cell + "\"");
            row.push_back(v);
        }
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

// Evenly spaced times over [0, t_hi] including both ends.
inline std::vector<double> uniform_times(double t_hi, int samples) {
    if (!(t_hi > 0.0)) throw std::invalid_argument("sampling needs t_hi > 0");
    if (samples < 2) throw std::invalid_argument("sampling needs at least 2 points");
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i)
        ts[static_cast<std::size_t>(i)] =
            std::min(t_hi * static_cast<double>(i) / (samples - 1), t_hi);
    ts.back() = t_hi;
    return ts;
}

// Recording grid {0, step, 2 step, ...} ∪ {horizon} for the simulator.
inline std::vector<double> step_grid(double horizon, double step) {
    if (!(horizon > 0.0) || !(step > 0.0))
        throw std::invalid_argument("step grid needs positive horizon and step");
    std::vector<double> g{0.0};
    for (std::size_t i = 1;; ++i) {
        const double t = static_cast<double>(i) * step;
        if (t >= horizon - 1e-12 * std::max(1.0, horizon)) break;
        g.push_back(t);
    }
    g.push_back(horizon);
    return g;
}

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::DominanceChange: return "dominance_change";
        case EventKind::SubpopulationExtinction: return "subpopulation_extinction";
        case EventKind::MutationFlowTakeover: return "mutation_flow_takeover";
        case EventKind::DominantBecomesResident: return "dominant_becomes_resident";
        case EventKind::GlobalExtinction: return "global_extinction";
        case EventKind::T0TripleArgmax: return "t0_triple_argmax";
        case EventKind::T0ExtinctionAtTransition: return "t0_extinction_at_transition";
        case EventKind::Horizon: return "horizon";
    }
    return "horizon";
}

inline EventKind event_kind_from_name(const std::string& s) {
    if (s == "dominance_change") return EventKind::DominanceChange;
    if (s == "subpopulation_extinction") return EventKind::SubpopulationExtinction;
    if (s == "mutation_flow_takeover") return EventKind::MutationFlowTakeover;
    if (s == "dominant_becomes_resident") return EventKind::DominantBecomesResident;
    if (s == "global_extinction") return EventKind::GlobalExtinction;
    if (s == "t0_triple_argmax") return EventKind::T0TripleArgmax;
    if (s == "t0_extinction_at_transition") return EventKind::T0ExtinctionAtTransition;
    if (s == "horizon") return EventKind::Horizon;
    throw std::invalid_argument("unknown event kind: " + s);
}

inline const char* termination_kind_name(TerminationKind k) {
    switch (k) {
        case TerminationKind::Horizon: return "horizon";
        case TerminationKind::GlobalExtinction: return "global_extinction";
        case TerminationKind::T0TripleArgmax: return "t0_triple_argmax";
        case TerminationKind::T0ExtinctionAtTransition:
            return "t0_extinction_at_transition";
    }
    return "horizon";
}

inline TerminationKind termination_kind_from_name(const std::string& s) {
    if (s == "horizon") return TerminationKind::Horizon;
    if (s == "global_extinction") return TerminationKind::GlobalExtinction;
    if (s == "t0_triple_argmax") return TerminationKind::T0TripleArgmax;
    if (s == "t0_extinction_at_transition")
        return TerminationKind::T0ExtinctionAtTransition;
    throw std::invalid_argument("unknown termination kind: " + s);
}

inline json limit_to_json(const LimitTrajectory& traj) {
    json segs = json::array();
    for (const auto& s : traj.segments) {
        json evs = json::array();
        for (const auto& e : s.events)
            evs.push_back(json{{"kind", event_kind_name(e.kind)}, {"trait", e.trait}});
        segs.push_back(json{{"t_start", s.t_start},
                            {"t_end", s.t_end},
                            {"beta_start", s.beta_start},
                            {"slopes", s.slopes},
                            {"lstar", s.lstar},
                            {"resident", s.resident},
                            {"end_event", event_kind_name(s.end_event)},
                            {"events", evs}});
    }
    return json{{"params", params_to_json(traj.params)},
                {"segments", segs},
                {"phase_times", traj.phase_times},
                {"dominant_indices", traj.dominant_indices},
                {"termination",
                 json{{"kind", termination_kind_name(traj.termination.kind)},
                      {"time", traj.termination.time}}}};
}

inline LimitTrajectory limit_from_json(const json& j) {
    detail::require_object(j, "trajectory");
    LimitTrajectory traj{params_from_json(j.at("params")), {}, {}, {}, {}};
    for (const auto& js : j.at("segments")) {
        Segment s;
        s.t_start = js.at("t_start").get<double>();
        s.t_end = js.at("t_end").get<double>();
        s.beta_start = js.at("beta_start").get<std::vector<double>>();
        s.slopes = js.at("slopes").get<std::vector<double>>();
        s.lstar = js.at("lstar").get<int>();
        s.resident = js.at("resident").get<bool>();
        s.end_event = event_kind_from_name(js.at("end_event").get<std::string>());
        for (const auto& je : js.at("events"))
            s.events.push_back({event_kind_from_name(je.at("kind").get<std::string>()),
                                je.at("trait").get<int>()});
        traj.segments.push_back(std::move(s));
    }
    traj.phase_times = j.at("phase_times").get<std::vector<double>>();
    traj.dominant_indices = j.at("dominant_indices").get<std::vector<int>>();
    traj.termination.kind =
        termination_kind_from_name(j.at("termination").at("kind").get<std::string>());
    traj.termination.time = j.at("termination").at("time").get<double>();
    return traj;
}

inline CsvTable limit_table(const LimitTrajectory& traj, const std::vector<double>& times) {
    const auto rows = sample_limit(traj, times);
    CsvTable tab;
    const std::size_t W = traj.segments.front().beta_start.size();
    tab.header.push_back("t");
    for (std::size_t l = 0; l < W; ++l)
        tab.header.push_back("beta_" + std::to_string(l));
    tab.header.push_back("lstar");
    tab.header.push_back("resident");
    for (const auto& r : rows) {
        std::vector<double> row;
        row.reserve(W + 3);
        row.push_back(r.t);
        for (double b : r.beta) row.push_back(b);
        row.push_back(static_cast<double>(r.lstar));
        row.push_back(r.resident ? 1.0 : 0.0);
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

inline CsvTable trace_table(const SimTrace& tr) {
    CsvTable tab;
    const std::size_t W = tr.counts_at.empty() ? 0 : tr.counts_at.front().size();
    tab.header.push_back("t_logk");
    for (std::size_t l = 0; l < W; ++l)
        tab.header.push_back("N_" + std::to_string(l));
    for (std::size_t l = 0; l < W; ++l)
        tab.header.push_back("beta_" + std::to_string(l));
    for (std::size_t i = 0; i < tr.grid.size(); ++i) {
        std::vector<double> row;
        row.reserve(2 * W + 1);
        row.push_back(tr.grid[i]);
        for (auto n : tr.counts_at[i]) row.push_back(static_cast<double>(n));
        for (double b : tr.exponents_at[i]) row.push_back(b);
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

// Same columns as a single trace, with per-grid-point medians across replicas.
inline CsvTable ensemble_table(const EnsembleSummary& ens) {
    CsvTable tab;
    const std::size_t W = ens.median.empty() ? 0 : ens.median.front().size();
    tab.header.push_back("t_logk");
    for (std::size_t l = 0; l < W; ++l)
        tab.header.push_back("N_" + std::to_string(l));
    for (std::size_t l = 0; l < W; ++l)
        tab.header.push_back("beta_" + std::to_string(l));
    std::vector<double> pool(ens.traces.size());
    for (std::size_t i = 0; i < ens.grid.size(); ++i) {
        std::vector<double> row;
        row.reserve(2 * W + 1);
        row.push_back(ens.grid[i]);
        for (std::size_t l = 0; l < W; ++l) {
            for (std::size_t r = 0; r < ens.traces.size(); ++r)
                pool[r] = static_cast<double>(ens.traces[r].counts_at[i][l]);
            std::sort(pool.begin(), pool.end());
            row.push_back(detail::quantile_sorted(pool, 0.5));
        }
        for (std::size_t l = 0; l < W; ++l) row.push_back(ens.median[i][l]);
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

struct CompareReport {
    std::vector<double> sup_error_per_trait;
    double sup_error = 0.0;
    std::vector<double> grid;             // times the comparison used
    std::vector<double> per_time_errors;  // worst trait error at each used time
    std::vector<double> crossing_time_estimates;
    double tolerance = 0.0;
    bool pass = false;
};

// Finite-K check of the exponent limit: sup over the recorded grid of the
// distance between median simulated exponents and the engine trajectory, plus
// crossing-time estimates for each dominance handover inside the window.
inline CompareReport compare(const EnsembleSummary& ens, const LimitTrajectory& traj,
                             double tolerance) {
    if (ens.grid.empty()) throw std::invalid_argument("ensemble recorded no grid");
    if (traj.segments.empty()) throw std::invalid_argument("empty limit trajectory");
    const std::size_t W = traj.segments.front().beta_start.size();
    if (ens.median.empty() || ens.median.front().size() != W)
        throw std::invalid_argument("trait grids differ between ensemble and trajectory");

    const double t_end = traj.segments.back().t_end;
    const bool extinct = traj.termination.kind == TerminationKind::GlobalExtinction;

    CompareReport rep;
    rep.tolerance = tolerance;
    rep.sup_error_per_trait.assign(W, 0.0);
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < ens.grid.size(); ++i) {
        const double t = ens.grid[i];
        if (!extinct && t > t_end + 1e-12 * std::max(1.0, t_end)) continue;
        const SampleRow row = sample_limit(traj, t);
        double worst = 0.0;
        for (std::size_t l = 0; l < W; ++l) {
            const double e = std::abs(ens.median[i][l] - row.beta[l]);
            rep.sup_error_per_trait[l] = std::max(rep.sup_error_per_trait[l], e);
            worst = std::max(worst, e);
        }
        used.push_back(i);
        rep.grid.push_back(t);
        rep.per_time_errors.push_back(worst);
    }
    if (rep.grid.empty())
        throw std::invalid_argument("ensemble grid lies outside the trajectory window");
    rep.sup_error = *std::max_element(rep.sup_error_per_trait.begin(),
                                      rep.sup_error_per_trait.end());

    // one estimate per dominance handover inside the window: the first time the
    // incoming trait's median exponent overtakes the outgoing one
    std::size_t scan = 0;
    for (std::size_t k = 0; k + 1 < traj.dominant_indices.size(); ++k) {
        const double sk = traj.phase_times[k];
        if (sk < rep.grid.front() || sk > rep.grid.back()) continue;
        const auto lo = static_cast<std::size_t>(traj.dominant_indices[k]);
        const auto ln = static_cast<std::size_t>(traj.dominant_indices[k + 1]);
        for (std::size_t i = scan; i + 1 < used.size(); ++i) {
            const double f0 = ens.median[used[i]][ln] - ens.median[used[i]][lo];
            const double f1 = ens.median[used[i + 1]][ln] - ens.median[used[i + 1]][lo];
            if (f0 < 0.0 && f1 >= 0.0) {
                const double t0 = rep.grid[i], t1 = rep.grid[i + 1];
                rep.crossing_time_estimates.push_back(t0 - f0 * (t1 - t0) / (f1 - f0));
                scan = i + 1;
                break;
            }
        }
    }

    rep.pass = rep.sup_error <= tolerance;
    return rep;
}

inline json compare_to_json(const CompareReport& rep) {
    return json{{"sup_error", rep.sup_error},
                {"sup_error_per_trait", rep.sup_error_per_trait},
                {"grid", rep.grid},
                {"per_time_errors", rep.per_time_errors},
                {"crossing_time_estimates", rep.crossing_time_estimates},
                {"tolerance", rep.tolerance},
                {"pass", rep.pass}};
}

inline const char* outcome_class_name(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::ReemergenceOfZero: return "reemergence_of_zero";
        case OutcomeClass::EvolutionarySuicide: return "evolutionary_suicide";
        case OutcomeClass::SubKReemergence: return "sub_k_reemergence";
        case OutcomeClass::OutOfScope: return "out_of_scope";
    }
    return "out_of_scope";
}

inline json outcome_to_json(const OutcomeReport& rep) {
    json j{{"k_tilde", rep.k_tilde},
           {"k_bar", rep.k_bar},
           {"m0", rep.m0},
           {"classification", outcome_class_name(rep.classification)},
           {"reason", rep.reason},
           {"dominance_dips_below_one", rep.dominance_dips_below_one}};
    j["tau_bar"] = rep.tau_bar ? json(*rep.tau_bar) : json(nullptr);
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hgt
