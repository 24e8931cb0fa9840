#pragma once

// Per-momentum Loschmidt amplitudes G^k(t) = Tr(rho_k U_k(t)) for the double quench, and the
// rate function g(t) = -(2/N) sum_k ln|G^k(t)|.
//
// The E_k-dependent global phases exp(-i E_1k t), exp(-i E_1k tau - i E_2k (t - tau)) have unit
// modulus and are left out of every amplitude returned here.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dqpt/model.hpp"
#include "dqpt/thermal.hpp"

namespace dqpt {

/// |G^k| at or below this is an exact zero of the amplitude.
inline constexpr double kZeroTol = 1e-14;

struct StageFrequencies {
    double omega1 = 0.0;  // Delta_1k / 2
    double omega2 = 0.0;  // Delta_2k / 2
};

/// cos(w1 t) - i sin(w1 t) (n . n1hat), valid for 0 <= t < tau.
std::complex<double> amplitude_stage1_k(const Vec3& nvec, double omega1, const Vec3& n1hat, double t);

/// Amplitude after the second quench (t >= tau), with a1 = cos(w1 tau), b1 = sin(w1 tau),
/// a2 = cos(w2 (t - tau)), b2 = sin(w2 (t - tau)):
///   a1 a2 - b1 b2 (n1.n2) - i a1 b2 (n.n2) - i a2 b1 (n.n1) + i b1 b2 n.(n1 x n2)
std::complex<double> amplitude_stage2_k(const Vec3& nvec, double omega1, const Vec3& n1hat, double tau,
                                        double omega2, const Vec3& n2hat, double t);

/// Everything the amplitude needs at one momentum.
struct ModeData {
    double k = 0.0;
    Vec3 nvec{};
    Vec3 n1hat{1.0, 0.0, 0.0};
    Vec3 n2hat{1.0, 0.0, 0.0};
    StageFrequencies freq;
};

ModeData make_mode(const QuenchSchedule& schedule, double k, const Vec3& nvec);
std::vector<ModeData> make_modes(const QuenchSchedule& schedule, const ThermalBlochField& field);

/// Stage-1 form for t < tau, stage-2 form for t >= tau.
std::complex<double> amplitude_k(const ModeData& mode, double tau, double t);

struct LogAmplitude {
    double log_modulus = 0.0;  // -infinity iff some |G^k| <= kZeroTol
    double phase = 0.0;        // wrapped to (-pi, pi]; 0 when log_modulus is -infinity
};

LogAmplitude amplitude_full(const QuenchSchedule& schedule, const ThermalBlochField& field, double t);
LogAmplitude amplitude_full(std::span<const ModeData> modes, double tau, double t);

struct RateCurve {
    std::vector<double> times;
    std::vector<double> g;  // +infinity where the amplitude vanishes
    double tau = 0.0;
    std::size_t n_modes = 0;
};

/// Evaluates g on `times`. Parallel over time samples; each sample sums its modes in ascending
/// momentum order, so the output is bit-identical for any thread count.
RateCurve rate_function(const QuenchSchedule& schedule, const ThermalBlochField& field,
                        std::span<const double> times, unsigned threads = 0);

struct KinkOptions {
    double threshold = 10.0;     // |second difference| / local scale
    std::size_t window = 25;     // half-width of the median window, in samples
    double relative_floor = 1e-9;
    double uniform_tol = 1e-6;   // relative spacing tolerance for the time grid
};

/// Times where the discrete second difference of g spikes above threshold x local scale.
/// Stencils containing tau in their interior or touching a non-finite sample are skipped, and a
/// flagged cluster adjacent to such a stencil is attributed to the quench and dropped.
std::vector<double> detect_kinks(const RateCurve& curve, const KinkOptions& options = {});

/// Uniform time grid t_i = t_max i / (n_steps - 1).
std::vector<double> uniform_times(double t_max, std::size_t n_steps);

}  // namespace dqpt
