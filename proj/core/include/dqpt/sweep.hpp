#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqpt/loschmidt.hpp"
#include "dqpt/model.hpp"
#include "dqpt/thermal.hpp"

namespace dqpt {

struct Axis {
    std::string label;
    std::vector<double> values;  // strictly increasing

    static Axis linspace(std::string label, double lo, double hi, std::size_t n);
};

/// Existence map over two parameter axes. Cells are stored row-major: y outer, x inner.
struct DiagramGrid {
    Axis x;
    Axis y;
    std::vector<std::uint8_t> cells;

    bool at(std::size_t ix, std::size_t iy) const { return cells[iy * x.values.size() + ix] != 0; }
};

/// cell(r1, r2) = (r1 - 1)(r2 - 1) <= 0 with r1 = J11/J12 on x and r2 = J21/J22 on y.
DiagramGrid ssh_phase_diagram(const Axis& r1, const Axis& r2, unsigned threads = 0);

/// cell(c2, m2) = kitaev_critical_cos(m1, c1, m2, c2) is nonempty, with c2 on x and m2 on y.
DiagramGrid kitaev_phase_diagram(double m1, double c1, const Axis& m2, const Axis& c2, unsigned threads = 0);

/// Named parameter replacements applied on top of a base run, e.g. {"tau", 8.0}, {"h1.j1", 0.5}.
/// Stage keys: h<i>.j1, h<i>.j2 (SSH); h<i>.M, h<i>.m, h<i>.c (Kitaev). Run keys: tau, beta, T.
struct ScheduleOverride {
    std::vector<std::pair<std::string, double>> values;
};

struct RateJob {
    QuenchSchedule schedule;
    Temperature temperature;
    std::size_t n_modes = 1000;
    bool pin_critical = true;
};

/// Momentum grid of a rate job (critical momenta pinned when requested).
MomentumGrid job_grid(const RateJob& job);

/// One rate curve for a job, exactly as batch_rate_curves computes each item.
RateCurve run_rate_job(const RateJob& job, std::span<const double> times, unsigned threads = 0);

/// Applies an override to a job. Throws InvalidParameter on unknown keys or invalid values.
RateJob apply_override(const RateJob& base, const ScheduleOverride& override_);

struct BatchItem {
    std::optional<RateCurve> curve;
    std::string error;  // set iff curve is empty
};

/// One curve per override, in order. An invalid override yields an error entry and the batch
/// continues.
std::vector<BatchItem> batch_rate_curves(const RateJob& base, std::span<const ScheduleOverride> overrides,
                                         std::span<const double> times, unsigned threads = 0);

}  // namespace dqpt
