#include "dqpt/loschmidt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqpt/errors.hpp"
#include "dqpt/parallel.hpp"

namespace dqpt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier's variant of Kahan summation.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double wrap_phase(double p) {
    double w = std::remainder(p, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

}  // namespace

std::complex<double> amplitude_stage1_k(const Vec3& nvec, double omega1, const Vec3& n1hat, double t) {
    const double phase = omega1 * t;
    return {std::cos(phase), -std::sin(phase) * dot(nvec, n1hat)};
}

std::complex<double> amplitude_stage2_k(const Vec3& nvec, double omega1, const Vec3& n1hat, double tau,
                                        double omega2, const Vec3& n2hat, double t) {
    const double a1 = std::cos(omega1 * tau);
    const double b1 = std::sin(omega1 * tau);
    const double s = omega2 * (t - tau);
    const double a2 = std::cos(s);
    const double b2 = std::sin(s);
    const double re = a1 * a2 - b1 * b2 * dot(n1hat, n2hat);
    const double im = -(a1 * b2 * dot(nvec, n2hat) + a2 * b1 * dot(nvec, n1hat)) +
                      b1 * b2 * dot(nvec, cross(n1hat, n2hat));
    return {re, im};
}

ModeData make_mode(const QuenchSchedule& schedule, double k, const Vec3& nvec) {
    const BlochSample s1 = schedule.h1(k);
    const BlochSample s2 = schedule.h2(k);
    ModeData m;
    m.k = k;
    m.nvec = nvec;
    m.n1hat = s1.nhat;
    m.n2hat = s2.nhat;
    m.freq = {0.5 * s1.delta, 0.5 * s2.delta};
    return m;
}

std::vector<ModeData> make_modes(const QuenchSchedule& schedule, const ThermalBlochField& field) {
    if (field.grid.size() != field.nvec.size()) {
        throw InvalidParameter("thermal field grid and vectors differ in length");
    }
    std::vector<ModeData> modes;
    modes.reserve(field.grid.size());
    for (std::size_t i = 0; i < field.grid.size(); ++i) {
        modes.push_back(make_mode(schedule, field.grid[i], field.nvec[i]));
    }
    return modes;
}

std::complex<double> amplitude_k(const ModeData& mode, double tau, double t) {
    if (t < tau) return amplitude_stage1_k(mode.nvec, mode.freq.omega1, mode.n1hat, t);
    return amplitude_stage2_k(mode.nvec, mode.freq.omega1, mode.n1hat, tau, mode.freq.omega2, mode.n2hat, t);
}

LogAmplitude amplitude_full(std::span<const ModeData> modes, double tau, double t) {
    CompensatedSum log_sum;
    CompensatedSum phase_sum;
    for (const auto& mode : modes) {
        const std::complex<double> g = amplitude_k(mode, tau, t);
        const double modulus = std::abs(g);
        if (modulus <= kZeroTol) return {-kInf, 0.0};
        log_sum.add(std::log(modulus));
        phase_sum.add(std::arg(g));
    }
    return {log_sum.value(), wrap_phase(phase_sum.value())};
}

LogAmplitude amplitude_full(const QuenchSchedule& schedule, const ThermalBlochField& field, double t) {
    if (t < 0.0) throw InvalidParameter("amplitude requested at negative time");
    const auto modes = make_modes(schedule, field);
    return amplitude_full(modes, schedule.tau, t);
}

RateCurve rate_function(const QuenchSchedule& schedule, const ThermalBlochField& field,
                        std::span<const double> times, unsigned threads) {
    const auto modes = make_modes(schedule, field);
    RateCurve curve;
    curve.times.assign(times.begin(), times.end());
    curve.g.assign(times.size(), 0.0);
    curve.tau = schedule.tau;
    curve.n_modes = modes.size();
    const double scale = -2.0 / static_cast<double>(modes.size());
    for (double t : times) {
        if (!(t >= 0.0)) throw InvalidParameter("rate function requested at negative time");
    }
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const double lm = amplitude_full(std::span<const ModeData>(modes), schedule.tau, times[i]).log_modulus;
        curve.g[i] = lm == -kInf ? kInf : scale * lm;
    });
    return curve;
}

std::vector<double> uniform_times(double t_max, std::size_t n_steps) {
    if (n_steps < 2) throw InvalidParameter("time grid needs at least two samples");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidParameter("t_max must be positive");
    std::vector<double> t(n_steps);
    const double denom = static_cast<double>(n_steps - 1);
    for (std::size_t i = 0; i < n_steps; ++i) t[i] = t_max * static_cast<double>(i) / denom;
    return t;
}

std::vector<double> detect_kinks(const RateCurve& curve, const KinkOptions& options) {
    const auto& t = curve.times;
    const auto& g = curve.g;
    const std::size_t n = t.size();
    if (g.size() != n) throw InvalidParameter("rate curve times and values differ in length");
    if (n < 3) return {};

    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw InvalidParameter("kink detection needs an increasing time grid");
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > options.uniform_tol * dt) {
            throw InvalidParameter("kink detection needs a uniform time grid");
        }
    }

    // valid[i]: second difference centred on i is usable.
    std::vector<bool> valid(n, false);
    std::vector<double> d2(n, 0.0);
    double mean_abs = 0.0;
    std::size_t finite_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isfinite(g[i])) {
            mean_abs += std::abs(g[i]);
            ++finite_count;
        }
    }
    if (finite_count > 0) mean_abs /= static_cast<double>(finite_count);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(g[i - 1]) || !std::isfinite(g[i]) || !std::isfinite(g[i + 1])) continue;
        if (t[i - 1] < curve.tau && curve.tau < t[i + 1]) continue;
        valid[i] = true;
        d2[i] = std::abs(g[i + 1] - 2.0 * g[i] + g[i - 1]);
    }

    const double floor = options.relative_floor * (1.0 + mean_abs);
    std::vector<bool> flagged(n, false);
    std::vector<double> window;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!valid[i]) continue;
        const std::size_t lo = i > options.window ? i - options.window : 0;
        const std::size_t hi = std::min(n - 1, i + options.window);
        window.clear();
        for (std::size_t j = lo; j <= hi; ++j) {
            if (valid[j]) window.push_back(d2[j]);
        }
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        const double scale = std::max(*mid, floor);
        flagged[i] = d2[i] > options.threshold * scale;
    }

    std::vector<double> kinks;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        std::size_t best = i;
        while (i + 1 < n && flagged[i]) {
            if (d2[i] > d2[best]) best = i;
            ++i;
        }
        const std::size_t end = i;  // one past the cluster
        const bool touches_left = start >= 2 && !valid[start - 1];
        const bool touches_right = end + 1 < n && !valid[end];
        if (!touches_left && !touches_right) kinks.push_back(t[best]);
    }
    return kinks;
}

}  // namespace dqpt
