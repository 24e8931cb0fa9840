#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqpt/model.hpp"
#include "dqpt/thermal.hpp"

namespace dqpt {

/// Roots of f(k) = nA(k) . nB(k) on [-pi, pi), ascending.
///
/// Sign changes on an n_scan-point grid are bisected to convergence. Zeros that touch without
/// changing sign are picked up from local minima of |f|, refined by golden-section search, and
/// kept when |f| < 1e-9.
std::vector<double> find_orthogonal_momenta(const BlochDispersion& a, const BlochDispersion& b,
                                            std::size_t n_scan = 4096);

/// cos k_c = -(J11 J21 + J12 J22) / (J11 J22 + J12 J21) for two SSH Hamiltonians; absent
/// exactly when (J11 - J12)(J21 - J22) > 0.
std::optional<double> ssh_critical_cos(double j11, double j12, double j21, double j22);

/// Roots y = cos k in [-1, 1] of sin^2 k + (m1 - c1 cos k)(m2 - c2 cos k) = 0, descending.
/// y = [(m1 c2 + m2 c1) +- Delta] / (2 (c1 c2 - 1)) with
/// Delta^2 = (m1 c2 - m2 c1)^2 - 4 c1 c2 + 4 + 4 m1 m2, i.e. the plain quadratic-formula root
/// (not Delta^2). For c1 c2 = 1 the single linear root is returned.
std::vector<double> kitaev_critical_cos(double m1, double c1, double m2, double c2);

/// t*_n = (n pi + pi/2) / omega for n = 0 .. n_max.
std::vector<double> ordinary_dqpt_times(double omega1_at_kc, int n_max);

/// tau*_n = (n pi + pi/2) / omega.
double metamorphic_tau(double omega1_at_kc, int n);

struct CriticalMomentum {
    double k = 0.0;
    double omega1 = 0.0;
    double dot_12 = 0.0;         // n1hat . n2hat at k
    double cross_02 = 0.0;       // |n0hat x n2hat| at k
    double thermal_norm = 0.0;   // |n(k)| of the initial state
    bool parallel_02 = false;
    std::vector<double> ordinary_times;
    std::vector<double> tau_star;
};

struct TauMatch {
    bool matched = false;  // within tau_match_tol (relative)
    bool near = false;     // within tau_near_tol but not matched
    std::size_t kc_index = 0;
    int n = 0;
    double tau_star = 0.0;
    double relative_deviation = 0.0;
};

struct CriticalReport {
    std::string method;  // "closed-form" or "bisection"
    std::vector<CriticalMomentum> momenta;
    bool orthogonality_12 = false;
    bool parallel_02 = false;
    bool metamorphic_possible = false;
    std::optional<TauMatch> tau_match;  // nearest tau*_n to schedule.tau, if any k_c exists
};

struct CriticalOptions {
    double tol = 1e-9;
    double tau_match_tol = 1e-9;
    double tau_near_tol = 1e-2;
    int n_max = 2;
    std::size_t n_scan = 4096;
};

/// Critical momenta of h1 vs h2 with their omega_1, t*_n and tau*_n tables.
///
/// When h1 and h2 are the same analytic model the closed forms give k_c; otherwise the bisection
/// scan does. For parity-even schedules only representatives in [0, pi] are listed.
CriticalReport check_metamorphic_conditions(const QuenchSchedule& schedule, Temperature temp,
                                            const CriticalOptions& options = {});

/// k_c and -k_c for every listed critical momentum (for grid pinning).
std::vector<double> critical_pins(const CriticalReport& report);

/// Uniform N-point grid with the critical momenta of the schedule pinned onto it.
/// Tabulated schedules keep the plain uniform grid.
MomentumGrid critical_aligned_grid(const QuenchSchedule& schedule, std::size_t n);

struct DeviationSample {
    double epsilon = 0.0;
    double g_i = 0.0;
};

/// g_i(eps) = -(2/N) ln|cos(omega (tau* + eps))|.
std::vector<DeviationSample> deviation_gi(double omega1_at_kc, double tau_star, std::span<const double> epsilons,
                                          std::size_t n_modes);

}  // namespace dqpt
