#include "dqpt/sweep.hpp"

#include <cmath>
#include <exception>

#include "dqpt/critical.hpp"
#include "dqpt/errors.hpp"
#include "dqpt/parallel.hpp"

namespace dqpt {

Axis Axis::linspace(std::string label, double lo, double hi, std::size_t n) {
    if (n < 2) throw InvalidParameter("axis needs at least two points");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw InvalidParameter("axis range must be finite and increasing");
    }
    Axis a;
    a.label = std::move(label);
    a.values.resize(n);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        a.values[i] = lo + (hi - lo) * static_cast<double>(i) / denom;
    }
    a.values.back() = hi;
    return a;
}

namespace {

template <class Predicate>
DiagramGrid fill_diagram(const Axis& x, const Axis& y, unsigned threads, Predicate&& pred) {
    DiagramGrid d{x, y, {}};
    const std::size_t nx = x.values.size();
    d.cells.assign(nx * y.values.size(), 0);
    parallel_for(d.cells.size(), threads, [&](std::size_t idx) {
        d.cells[idx] = pred(x.values[idx % nx], y.values[idx / nx]) ? 1 : 0;
    });
    return d;
}

BlochDispersion& stage(RateJob& job, char index) {
    switch (index) {
        case '0': return job.schedule.h0;
        case '1': return job.schedule.h1;
        case '2': return job.schedule.h2;
        default: throw InvalidParameter(std::string("unknown stage h") + index);
    }
}

void apply_stage_key(BlochDispersion& d, const std::string& field, double v) {
    if (const auto* p = d.as_ssh()) {
        SshParams q = *p;
        if (field == "j1") q.j1 = v;
        else if (field == "j2") q.j2 = v;
        else throw InvalidParameter("SSH stage has no parameter '" + field + "'");
        d = BlochDispersion::ssh(q);
    } else if (const auto* p = d.as_kitaev()) {
        KitaevParams q = *p;
        if (field == "M") q.bigM = v;
        else if (field == "m") q.m = v;
        else if (field == "c") q.c = v;
        else throw InvalidParameter("Kitaev stage has no parameter '" + field + "'");
        d = BlochDispersion::kitaev(q);
    } else {
        throw InvalidParameter("tabulated stages cannot be overridden");
    }
}

}  // namespace

DiagramGrid ssh_phase_diagram(const Axis& r1, const Axis& r2, unsigned threads) {
    for (const auto* axis : {&r1, &r2}) {
        for (double v : axis->values) {
            if (!(v > 0.0)) throw InvalidParameter("SSH hopping ratios must be positive");
        }
    }
    return fill_diagram(r1, r2, threads, [](double a, double b) { return (a - 1.0) * (b - 1.0) <= 0.0; });
}

DiagramGrid kitaev_phase_diagram(double m1, double c1, const Axis& m2, const Axis& c2, unsigned threads) {
    return fill_diagram(c2, m2, threads,
                        [&](double c, double m) { return !kitaev_critical_cos(m1, c1, m, c).empty(); });
}

MomentumGrid job_grid(const RateJob& job) {
    if (job.n_modes < 2) throw InvalidParameter("momentum grid needs at least two points");
    return job.pin_critical ? critical_aligned_grid(job.schedule, job.n_modes) : MomentumGrid::uniform(job.n_modes);
}

RateCurve run_rate_job(const RateJob& job, std::span<const double> times, unsigned threads) {
    const auto grid = job_grid(job);
    const auto field = thermal_bloch(job.schedule.h0, job.temperature, grid.points());
    return rate_function(job.schedule, field, times, threads);
}

RateJob apply_override(const RateJob& base, const ScheduleOverride& override_) {
    RateJob job = base;
    double tau = job.schedule.tau;
    for (const auto& [key, value] : override_.values) {
        if (key == "tau") {
            tau = value;
        } else if (key == "beta") {
            job.temperature = Temperature::from_beta(value);
        } else if (key == "T") {
            job.temperature = Temperature::from_T(value);
        } else if (key.size() > 3 && key[0] == 'h' && key[2] == '.') {
            apply_stage_key(stage(job, key[1]), key.substr(3), value);
        } else {
            throw InvalidParameter("unknown override key '" + key + "'");
        }
    }
    job.schedule = QuenchSchedule(job.schedule.h0, job.schedule.h1, job.schedule.h2, tau);
    return job;
}

std::vector<BatchItem> batch_rate_curves(const RateJob& base, std::span<const ScheduleOverride> overrides,
                                         std::span<const double> times, unsigned threads) {
    std::vector<BatchItem> items(overrides.size());
    // items run one after another; each curve parallelises over its own time samples
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        try {
            items[i].curve = run_rate_job(apply_override(base, overrides[i]), times, threads);
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    }
    return items;
}

}  // namespace dqpt
