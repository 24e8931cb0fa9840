#include "dqpt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dqpt/errors.hpp"
#include "dqpt/loschmidt.hpp"
#include "dqpt/parallel.hpp"

namespace dqpt::oracle {
namespace {

constexpr double kHermitianTol = 1e-14;

cplx phase_factor(double angle) { return {std::cos(angle), -std::sin(angle)}; }  // exp(-i angle)

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& gen, double lo, double hi) { return lo + (hi - lo) * uniform01(gen); }

}  // namespace

Matrix2 Matrix2::adjoint() const { return {{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}}; }

Matrix2 operator*(const Matrix2& x, const Matrix2& y) {
    return {{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
             x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
}

Matrix2 operator+(const Matrix2& x, const Matrix2& y) {
    return {{x.a[0] + y.a[0], x.a[1] + y.a[1], x.a[2] + y.a[2], x.a[3] + y.a[3]}};
}

Matrix2 operator-(const Matrix2& x, const Matrix2& y) {
    return {{x.a[0] - y.a[0], x.a[1] - y.a[1], x.a[2] - y.a[2], x.a[3] - y.a[3]}};
}

Matrix2 operator*(cplx s, const Matrix2& x) { return {{s * x.a[0], s * x.a[1], s * x.a[2], s * x.a[3]}}; }

double max_abs_diff(const Matrix2& x, const Matrix2& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

Matrix2 pauli(int axis) {
    switch (axis) {
        case 0: return {{cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)}};
        case 1: return {{cplx(0.0), cplx(0.0, -1.0), cplx(0.0, 1.0), cplx(0.0)}};
        case 2: return {{cplx(1.0), cplx(0.0), cplx(0.0), cplx(-1.0)}};
        default: throw InvalidParameter("Pauli axis must be 0, 1 or 2");
    }
}

Matrix2 build_hk(const BlochSample& s) {
    const double h = 0.5 * s.delta;
    Matrix2 m = cplx(s.e) * Matrix2::identity();
    for (int i = 0; i < 3; ++i) m = m + cplx(h * s.nhat[static_cast<std::size_t>(i)]) * pauli(i);
    return m;
}

Eigen2 eigen_hermitian(const Matrix2& h) {
    double scale = 1.0;
    for (const auto& z : h.a) scale = std::max(scale, std::abs(z));
    if (std::abs(h.a[0].imag()) > kHermitianTol * scale || std::abs(h.a[3].imag()) > kHermitianTol * scale ||
        std::abs(h.a[1] - std::conj(h.a[2])) > kHermitianTol * scale) {
        throw InvalidParameter("matrix is not Hermitian");
    }
    const double a = h.a[0].real();
    const double d = h.a[3].real();
    const double mean = 0.5 * (a + d);
    const double half = std::hypot(0.5 * (a - d), std::abs(h.a[1]));
    Eigen2 e;
    e.lower = mean - half;
    e.upper = mean + half;
    const Matrix2 id = Matrix2::identity();
    if (2.0 * half < kGapTol) {
        e.degenerate = true;
        e.p_lower = cplx(0.5) * id;
        e.p_upper = cplx(0.5) * id;
        return e;
    }
    const cplx inv(1.0 / (2.0 * half));
    e.p_upper = inv * (h - cplx(e.lower) * id);
    e.p_lower = inv * (cplx(e.upper) * id - h);
    return e;
}

Matrix2 expm_unitary(const Matrix2& h, double t) {
    const Eigen2 e = eigen_hermitian(h);
    if (e.degenerate) return phase_factor(0.5 * (e.lower + e.upper) * t) * Matrix2::identity();
    return phase_factor(e.lower * t) * e.p_lower + phase_factor(e.upper * t) * e.p_upper;
}

ThermalDensity thermal_density(const Matrix2& h0, Temperature temp) {
    const Eigen2 e = eigen_hermitian(h0);
    ThermalDensity out;
    if (e.degenerate) {
        out.rho = cplx(0.5) * Matrix2::identity();
        out.ambiguous_ground_state = temp.is_zero_temperature();
        return out;
    }
    if (temp.is_zero_temperature()) {
        out.rho = e.p_lower;
        return out;
    }
    // weights relative to the lower level keep the exponent nonpositive
    const double w = std::exp(-temp.beta() * (e.upper - e.lower));
    out.rho = cplx(1.0 / (1.0 + w)) * (e.p_lower + cplx(w) * e.p_upper);
    return out;
}

cplx amplitude_bruteforce(const StageSamples& stages, double tau, Temperature temp, double t) {
    if (t < 0.0) throw InvalidParameter("amplitude requested at negative time");
    const Matrix2 rho = thermal_density(build_hk(stages.h0), temp).rho;
    const Matrix2 h1 = build_hk(stages.h1);
    if (t < tau) return (rho * expm_unitary(h1, t)).trace();
    const Matrix2 u = expm_unitary(build_hk(stages.h2), t - tau) * expm_unitary(h1, tau);
    return (rho * u).trace();
}

cplx closed_form_amplitude(const StageSamples& stages, double tau, Temperature temp, double t) {
    const Vec3 nvec = thermal_vector(stages.h0, temp);
    const double w1 = 0.5 * stages.h1.delta;
    if (t < tau) {
        return phase_factor(stages.h1.e * t) * amplitude_stage1_k(nvec, w1, stages.h1.nhat, t);
    }
    const double w2 = 0.5 * stages.h2.delta;
    return phase_factor(stages.h1.e * tau + stages.h2.e * (t - tau)) *
           amplitude_stage2_k(nvec, w1, stages.h1.nhat, tau, w2, stages.h2.nhat, t);
}

OracleDraw make_draw(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 gen(seq);
    static constexpr std::array<double, 5> kBetas{0.0, 0.1, 1.0, 10.0, std::numeric_limits<double>::infinity()};

    OracleDraw d;
    const bool ssh = (gen() & 1u) == 0;
    d.model = ssh ? "ssh" : "kitaev";
    d.k = uniform(gen, -kPi, kPi);
    d.beta = kBetas[gen() % kBetas.size()];
    d.tau = uniform(gen, 0.1, 5.0);
    d.t = uniform(gen, 0.0, 2.0 * d.tau);
    std::array<BlochSample, 3> s;
    for (auto& stage : s) {
        if (ssh) {
            const SshParams p{uniform(gen, 0.1, 2.0), uniform(gen, 0.1, 2.0)};
            stage = ssh_bloch(p, d.k);
        } else {
            const KitaevParams p{uniform(gen, 0.5, 2.0), uniform(gen, -3.0, 3.0), uniform(gen, -3.0, 3.0)};
            stage = kitaev_bloch(p, d.k);
        }
    }
    d.stages = {s[0], s[1], s[2]};
    return d;
}

OracleSummary run_oracle_check(std::size_t draws, std::uint64_t seed, const ClosedForm& closed, double threshold,
                               unsigned threads) {
    if (draws == 0) throw InvalidParameter("oracle check needs at least one draw");
    std::vector<OracleDraw> all(draws);
    std::vector<double> deviation(draws, 0.0);
    std::vector<double> modulus(draws, 0.0);
    parallel_for(draws, threads, [&](std::size_t i) {
        all[i] = make_draw(seed, i);
        const auto temp = Temperature::from_beta(all[i].beta);
        const cplx brute = amplitude_bruteforce(all[i].stages, all[i].tau, temp, all[i].t);
        const cplx fast = closed(all[i].stages, all[i].tau, temp, all[i].t);
        deviation[i] = std::abs(brute - fast);
        if (std::isnan(deviation[i])) deviation[i] = std::numeric_limits<double>::infinity();
        modulus[i] = std::abs(brute);
    });

    OracleSummary s;
    s.draws = draws;
    s.seed = seed;
    s.threshold = threshold;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        if (deviation[i] > deviation[worst]) worst = i;
        s.max_modulus = std::max(s.max_modulus, modulus[i]);
    }
    s.max_deviation = deviation[worst];
    s.worst = all[worst];
    s.passed = s.max_deviation < threshold;
    return s;
}

}  // namespace dqpt::oracle
