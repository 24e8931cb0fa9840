#include "dqpt/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqpt/errors.hpp"

namespace dqpt {
namespace {

constexpr double kRootTol = 1e-12;
constexpr double kTangentTol = 1e-9;
constexpr double kDedupTol = 1e-9;

double orthogonality(const BlochDispersion& a, const BlochDispersion& b, double k) {
    return dot(a(k).nhat, b(k).nhat);
}

double periodic_distance(double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, 2.0 * kPi - d);
}

// Bisection on a sign-changing bracket; returns the endpoint with the smaller |f|.
template <class F>
double bisect(const F& f, double lo, double hi, double f_lo) {
    const bool lo_negative = f_lo < 0.0;
    double f_hi = f(hi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == lo_negative) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

// Golden-section minimisation of |f| on [lo, hi].
template <class F>
double minimize_abs(const F& f, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = std::abs(f(x1));
    double f2 = std::abs(f(x2));
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = std::abs(f(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = std::abs(f(x2));
        }
    }
    return f1 < f2 ? x1 : x2;
}

void push_unique(std::vector<double>& roots, double k) {
    k = wrap_momentum(k);
    for (double r : roots) {
        if (periodic_distance(r, k) < kDedupTol) return;
    }
    roots.push_back(k);
}

// Scan on a fixed set of momenta (tabulated input): roots are linearly interpolated.
std::vector<double> scan_on_table(const BlochDispersion& a, const BlochDispersion& b, std::span<const double> grid) {
    const std::size_t n = grid.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = orthogonality(a, b, grid[i]);
    std::vector<double> roots;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double kj = j == 0 ? grid[0] + 2.0 * kPi : grid[j];
        if (f[i] == 0.0) {
            push_unique(roots, grid[i]);
        } else if (f[i] * f[j] < 0.0) {
            push_unique(roots, grid[i] + (kj - grid[i]) * f[i] / (f[i] - f[j]));
        } else {
            const double prev = f[(i + n - 1) % n];
            if (std::abs(f[i]) <= std::abs(prev) && std::abs(f[i]) <= std::abs(f[j]) &&
                std::abs(f[i]) < kTangentTol) {
                push_unique(roots, grid[i]);
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

bool is_analytic(const BlochDispersion& d) { return d.kind() != DispersionKind::Tabulated; }

// Table momenta either side of k (periodic) and the weight of the upper one.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double w = 0.0;
};

Bracket table_bracket(const TabulatedDispersion& table, double k) {
    const auto m = table.momenta();
    k = wrap_momentum(k);
    const auto it = std::upper_bound(m.begin(), m.end(), k);
    Bracket b;
    if (it == m.begin()) {
        b.lo = m.back() - 2.0 * kPi;
        b.hi = m.front();
    } else if (it == m.end()) {
        b.lo = m.back();
        b.hi = m.front() + 2.0 * kPi;
    } else {
        b.lo = *(it - 1);
        b.hi = *it;
    }
    b.w = (k - b.lo) / (b.hi - b.lo);
    return b;
}

// Stage samples at a root found between table points: linear in e, Delta and nhat.
BlochSample interpolated(const BlochDispersion& d, const Bracket& b) {
    const BlochSample x = d(wrap_momentum(b.lo));
    const BlochSample y = d(wrap_momentum(b.hi));
    if (b.w == 0.0) return x;
    const auto lerp = [&](double u, double v) { return (1.0 - b.w) * u + b.w * v; };
    const Vec3 dir{lerp(x.nhat[0], y.nhat[0]), lerp(x.nhat[1], y.nhat[1]), lerp(x.nhat[2], y.nhat[2])};
    if (norm(dir) == 0.0) return BlochSample::from_gap(lerp(x.e, y.e), 0.0, {1.0, 0.0, 0.0});
    return BlochSample::from_gap(lerp(x.e, y.e), lerp(x.delta, y.delta), dir);
}

}  // namespace

std::vector<double> find_orthogonal_momenta(const BlochDispersion& a, const BlochDispersion& b, std::size_t n_scan) {
    if (n_scan < 64) throw InvalidParameter("orthogonality scan needs at least 64 points");
    if (const auto* t = a.as_tabulated()) return scan_on_table(a, b, t->momenta());
    if (const auto* t = b.as_tabulated()) return scan_on_table(a, b, t->momenta());

    auto f = [&](double k) { return orthogonality(a, b, k); };
    const double step = 2.0 * kPi / static_cast<double>(n_scan);
    std::vector<double> ks(n_scan + 1);
    std::vector<double> fs(n_scan + 1);
    for (std::size_t j = 0; j < n_scan; ++j) {
        ks[j] = -kPi + step * static_cast<double>(j);
        fs[j] = f(ks[j]);
    }
    ks[n_scan] = kPi;
    fs[n_scan] = fs[0];

    std::vector<double> roots;
    std::vector<bool> bracketed(n_scan, false);  // interval [j, j+1] holds a root
    for (std::size_t j = 0; j < n_scan; ++j) {
        if (fs[j] == 0.0) {
            push_unique(roots, ks[j]);
            bracketed[j] = true;
            bracketed[(j + n_scan - 1) % n_scan] = true;
        } else if (fs[j] * fs[j + 1] < 0.0) {
            const double r = bisect(f, ks[j], ks[j + 1], fs[j]);
            // a sign flip across a gap closing is a jump, not a zero
            if (std::abs(f(r)) < kRootTol) push_unique(roots, r);
            bracketed[j] = true;
        }
    }
    for (std::size_t j = 0; j < n_scan; ++j) {
        const std::size_t prev = (j + n_scan - 1) % n_scan;
        if (bracketed[j] || bracketed[prev]) continue;
        const double a_j = std::abs(fs[j]);
        if (a_j > std::abs(fs[prev]) || a_j > std::abs(fs[j + 1])) continue;
        const double k = minimize_abs(f, ks[j] - step, ks[j] + step);
        if (std::abs(f(k)) < kTangentTol) push_unique(roots, k);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::optional<double> ssh_critical_cos(double j11, double j12, double j21, double j22) {
    if (!(j11 > 0.0 && j12 > 0.0 && j21 > 0.0 && j22 > 0.0)) {
        throw InvalidParameter("SSH hoppings must be positive");
    }
    if ((j11 - j12) * (j21 - j22) > 0.0) return std::nullopt;
    const double x = -(j11 * j21 + j12 * j22) / (j11 * j22 + j12 * j21);
    return std::clamp(x, -1.0, 1.0);
}

std::vector<double> kitaev_critical_cos(double m1, double c1, double m2, double c2) {
    // (c1 c2 - 1) y^2 - (m1 c2 + m2 c1) y + (1 + m1 m2) = 0
    const double qa = c1 * c2 - 1.0;
    const double qb = -(m1 * c2 + m2 * c1);
    const double qc = 1.0 + m1 * m2;
    std::vector<double> candidates;
    if (qa == 0.0) {
        if (qb != 0.0) {
            candidates.push_back(-qc / qb);
        } else if (qc == 0.0) {
            // n1 . n2 vanishes at every momentum
            return {1.0, -1.0};
        }
    } else {
        const double diff = m1 * c2 - m2 * c1;
        double disc = diff * diff - 4.0 * c1 * c2 + 4.0 + 4.0 * m1 * m2;
        if (disc < 0.0) {
            if (disc < -1e-14 * (1.0 + qb * qb)) return {};
            disc = 0.0;
        }
        const double root_disc = std::sqrt(disc);
        const double q = -0.5 * (qb + (qb >= 0.0 ? root_disc : -root_disc));
        if (q == 0.0) {
            candidates.push_back(0.0);
        } else {
            candidates.push_back(q / qa);
            candidates.push_back(qc / q);
        }
    }
    std::vector<double> ys;
    for (double y : candidates) {
        if (!std::isfinite(y) || y < -1.0 - 1e-12 || y > 1.0 + 1e-12) continue;
        y = std::clamp(y, -1.0, 1.0);
        if (std::none_of(ys.begin(), ys.end(), [&](double v) { return std::abs(v - y) < 1e-15; })) {
            ys.push_back(y);
        }
    }
    std::sort(ys.begin(), ys.end(), std::greater<>());
    return ys;
}

std::vector<double> ordinary_dqpt_times(double omega1_at_kc, int n_max) {
    if (n_max < 0) throw InvalidParameter("n_max must be nonnegative");
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) t.push_back(metamorphic_tau(omega1_at_kc, n));
    return t;
}

double metamorphic_tau(double omega1_at_kc, int n) {
    if (!(omega1_at_kc > 0.0) || !std::isfinite(omega1_at_kc)) {
        throw InvalidParameter("critical mode is gapless; no finite critical time");
    }
    if (n < 0) throw InvalidParameter("branch index n must be nonnegative");
    return (static_cast<double>(n) * kPi + 0.5 * kPi) / omega1_at_kc;
}

CriticalReport check_metamorphic_conditions(const QuenchSchedule& schedule, Temperature temp,
                                            const CriticalOptions& options) {
    if (!(options.tol > 0.0)) throw InvalidParameter("tolerance must be positive");
    CriticalReport report;
    std::vector<double> ks;

    const auto* s1 = schedule.h1.as_ssh();
    const auto* s2 = schedule.h2.as_ssh();
    const auto* k1 = schedule.h1.as_kitaev();
    const auto* k2 = schedule.h2.as_kitaev();
    if (s1 && s2) {
        report.method = "closed-form";
        if (auto x = ssh_critical_cos(s1->j1, s1->j2, s2->j1, s2->j2)) ks.push_back(std::acos(*x));
    } else if (k1 && k2) {
        report.method = "closed-form";
        for (double y : kitaev_critical_cos(k1->m, k1->c, k2->m, k2->c)) ks.push_back(std::acos(y));
    } else {
        report.method = "bisection";
        const bool even = is_analytic(schedule.h1) && is_analytic(schedule.h2);
        for (double k : find_orthogonal_momenta(schedule.h1, schedule.h2, options.n_scan)) {
            if (!even) {
                ks.push_back(k);
            } else if (k >= 0.0) {
                ks.push_back(k);
            } else if (k + kPi < kDedupTol) {
                ks.push_back(kPi);
            }
        }
    }
    std::sort(ks.begin(), ks.end());

    const TabulatedDispersion* table = schedule.h1.as_tabulated();
    if (table == nullptr) table = schedule.h2.as_tabulated();
    if (table == nullptr) table = schedule.h0.as_tabulated();

    for (double k : ks) {
        BlochSample h0, h1, h2;
        CriticalMomentum cm;
        cm.k = k;
        if (table == nullptr) {
            h0 = schedule.h0(k);
            h1 = schedule.h1(k);
            h2 = schedule.h2(k);
            cm.dot_12 = dot(h1.nhat, h2.nhat);
        } else {
            // the scan placed k at the linear zero of n1.n2 between table points
            const Bracket b = table_bracket(*table, k);
            h0 = interpolated(schedule.h0, b);
            h1 = interpolated(schedule.h1, b);
            h2 = interpolated(schedule.h2, b);
            const double f_lo = dot(schedule.h1(wrap_momentum(b.lo)).nhat, schedule.h2(wrap_momentum(b.lo)).nhat);
            const double f_hi = dot(schedule.h1(wrap_momentum(b.hi)).nhat, schedule.h2(wrap_momentum(b.hi)).nhat);
            cm.dot_12 = (1.0 - b.w) * f_lo + b.w * f_hi;
        }
        cm.omega1 = 0.5 * h1.delta;
        if (!(std::abs(cm.dot_12) < options.tol)) continue;
        cm.cross_02 = norm(cross(h0.nhat, h2.nhat));
        cm.thermal_norm = norm(thermal_vector(h0, temp));
        cm.parallel_02 = cm.cross_02 < options.tol || cm.thermal_norm < options.tol;
        if (cm.omega1 > 0.0) {
            cm.ordinary_times = ordinary_dqpt_times(cm.omega1, options.n_max);
            cm.tau_star = cm.ordinary_times;
        }
        report.momenta.push_back(std::move(cm));
    }

    report.orthogonality_12 = !report.momenta.empty();
    report.parallel_02 = std::any_of(report.momenta.begin(), report.momenta.end(),
                                     [](const CriticalMomentum& m) { return m.parallel_02; });
    report.metamorphic_possible = report.orthogonality_12 && report.parallel_02;

    for (std::size_t i = 0; i < report.momenta.size(); ++i) {
        const double omega = report.momenta[i].omega1;
        if (!(omega > 0.0)) continue;
        const double branch = std::round((omega * schedule.tau - 0.5 * kPi) / kPi);
        const int n = static_cast<int>(std::max(0.0, branch));
        const double ts = metamorphic_tau(omega, n);
        const double rel = std::abs(schedule.tau - ts) / ts;
        if (!report.tau_match || rel < report.tau_match->relative_deviation) {
            TauMatch m;
            m.kc_index = i;
            m.n = n;
            m.tau_star = ts;
            m.relative_deviation = rel;
            m.matched = rel <= options.tau_match_tol;
            m.near = !m.matched && rel <= options.tau_near_tol;
            report.tau_match = m;
        }
    }
    return report;
}

std::vector<double> critical_pins(const CriticalReport& report) {
    std::vector<double> pins;
    for (const auto& m : report.momenta) {
        pins.push_back(m.k);
        pins.push_back(-m.k);
    }
    return pins;
}

MomentumGrid critical_aligned_grid(const QuenchSchedule& schedule, std::size_t n) {
    auto grid = MomentumGrid::uniform(n);
    if (!is_analytic(schedule.h0) || !is_analytic(schedule.h1) || !is_analytic(schedule.h2)) return grid;
    const auto report = check_metamorphic_conditions(schedule, Temperature::zero());
    const auto pins = critical_pins(report);
    return grid.with_pinned(pins);
}

std::vector<DeviationSample> deviation_gi(double omega1_at_kc, double tau_star, std::span<const double> epsilons,
                                          std::size_t n_modes) {
    if (!(omega1_at_kc > 0.0)) throw InvalidParameter("critical mode is gapless");
    if (n_modes == 0) throw InvalidParameter("mode count must be positive");
    const double scale = -2.0 / static_cast<double>(n_modes);
    const double phase = omega1_at_kc * tau_star;
    const double branch = std::round((phase - 0.5 * kPi) / kPi);
    const double residual = phase - (branch * kPi + 0.5 * kPi);
    const bool resonant = branch >= 0.0 && std::abs(residual) <= 1e-12 * std::max(1.0, std::abs(phase));

    std::vector<DeviationSample> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        // at resonance |cos(omega (tau* + eps))| = |sin(omega eps)|
        const double c = resonant ? std::abs(std::sin(omega1_at_kc * eps))
                                  : std::abs(std::cos(omega1_at_kc * (tau_star + eps)));
        const double gi = c == 0.0 ? std::numeric_limits<double>::infinity() : scale * std::log(c);
        out.push_back({eps, gi});
    }
    return out;
}

}  // namespace dqpt
