// Walks one limit trajectory phase by phase and prints what the classifier
// concludes from the same parameters. Build target: demo_phases.

#include <cstdio>

#include "hgt/io.hpp"
#include "hgt/limit.hpp"
#include "hgt/model.hpp"
#include "hgt/outcome.hpp"

using namespace hgt;

int main() {
    const ModelParams p(1.4, 0.3183098861837907, 1.5, 1.0);
    std::printf("traits 0..%d on step %.2f, transfer %.2f, mutation exponent %.4f\n\n",
                p.num_traits(), p.delta(), p.tau(), p.alpha());

    EngineOptions opt;
    opt.t_max = 10.0;
    const LimitTrajectory traj = run_limit(p, opt);

    std::printf("%-10s %-10s %-8s %-10s  %s\n", "t_start", "t_end", "lstar",
                "resident", "end event");
    for (const auto& seg : traj.segments) {
        std::printf("%-10.5f %-10.5f %-8d %-10s  %s\n", seg.t_start, seg.t_end,
                    seg.lstar, seg.resident ? "yes" : "no",
                    event_kind_name(seg.end_event));
    }

    std::printf("\nphase boundaries:");
    for (double s : traj.phase_times) std::printf(" %.5f", s);
    std::printf("\ntermination: %s at t=%.5f\n",
                termination_kind_name(traj.termination.kind),
                traj.termination.time);

    // the closed-form classifier covers the fine-grid regime delta < 4/3
    const ModelParams q(0.3, 0.3183098861837907, 1.0, 1.0);
    const OutcomeReport rep = classify(q);
    std::printf("\nclassifier on delta=%.2f, tau=%.2f: %s\n", q.delta(), q.tau(),
                outcome_class_name(rep.classification));
    if (rep.tau_bar)
        std::printf("predicted first re-emergence of trait 0: t=%.5f\n", *rep.tau_bar);

    std::printf("\nexponents on a coarse grid:\n%-8s", "t");
    for (int l = 0; l <= p.num_traits(); ++l) std::printf(" beta_%d ", l);
    std::printf("\n");
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 1.0) {
        const SampleRow row = sample_limit(traj, t);
        std::printf("%-8.2f", t);
        for (double b : row.beta) std::printf(" %6.4f ", b);
        std::printf("\n");
    }
    return 0;
}
