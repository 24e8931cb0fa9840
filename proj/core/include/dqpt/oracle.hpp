#pragma once

// Brute-force reference path: explicit 2x2 matrices, spectral exponentials and direct traces.
// Nothing here calls into the closed-form amplitude code.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "dqpt/model.hpp"
#include "dqpt/thermal.hpp"

namespace dqpt::oracle {

using cplx = std::complex<double>;

struct Matrix2 {
    std::array<cplx, 4> a{};  // row-major: a[0]=(0,0) a[1]=(0,1) a[2]=(1,0) a[3]=(1,1)

    static Matrix2 identity() { return {{cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)}}; }
    cplx operator()(int r, int c) const { return a[static_cast<std::size_t>(2 * r + c)]; }

    Matrix2 adjoint() const;
    cplx trace() const { return a[0] + a[3]; }
};

Matrix2 operator*(const Matrix2& x, const Matrix2& y);
Matrix2 operator+(const Matrix2& x, const Matrix2& y);
Matrix2 operator-(const Matrix2& x, const Matrix2& y);
Matrix2 operator*(cplx s, const Matrix2& x);

/// Max entrywise modulus of x - y.
double max_abs_diff(const Matrix2& x, const Matrix2& y);

/// Pauli matrices sigma_x, sigma_y, sigma_z.
Matrix2 pauli(int axis);

/// E I + (Delta / 2) nhat . sigma.
Matrix2 build_hk(const BlochSample& sample);

struct Eigen2 {
    double lower = 0.0;
    double upper = 0.0;
    Matrix2 p_lower;  // spectral projectors; both I/2 when the spectrum is degenerate
    Matrix2 p_upper;
    bool degenerate = false;
};

/// Closed-form eigendecomposition from trace and determinant. Throws on non-Hermitian input.
Eigen2 eigen_hermitian(const Matrix2& h);

/// exp(-i H t) via the spectral decomposition.
Matrix2 expm_unitary(const Matrix2& h, double t);

struct ThermalDensity {
    Matrix2 rho;
    bool ambiguous_ground_state = false;  // beta = inf with a degenerate spectrum; rho = I/2
};

/// exp(-beta H) / Tr exp(-beta H); the lower-level projector at beta = inf.
ThermalDensity thermal_density(const Matrix2& h0, Temperature temp);

struct StageSamples {
    BlochSample h0;
    BlochSample h1;
    BlochSample h2;
};

/// Tr(rho0 U1(t)) for t < tau, Tr(rho0 U2(t - tau) U1(tau)) for t >= tau, E phases included.
cplx amplitude_bruteforce(const StageSamples& stages, double tau, Temperature temp, double t);

/// Closed-form amplitude under test, E phases included.
using ClosedForm = std::function<cplx(const StageSamples&, double tau, Temperature, double t)>;

/// Closed-form amplitude assembled from the thermal and loschmidt modules.
cplx closed_form_amplitude(const StageSamples& stages, double tau, Temperature temp, double t);

struct OracleDraw {
    std::string model;
    double k = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double t = 0.0;
    StageSamples stages;
};

struct OracleSummary {
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    double threshold = 1e-12;
    double max_deviation = 0.0;
    double max_modulus = 0.0;  // largest |G| seen on the brute-force side
    OracleDraw worst;
    bool passed = false;
};

/// Deterministic random draw `index` of a seeded stream: SSH or Kitaev stages, beta from
/// {0, 0.1, 1, 10, inf}, t uniform in [0, 2 tau].
OracleDraw make_draw(std::uint64_t seed, std::size_t index);

/// Compares `closed` against the brute-force trace over `draws` seeded draws.
OracleSummary run_oracle_check(std::size_t draws, std::uint64_t seed, const ClosedForm& closed = closed_form_amplitude,
                               double threshold = 1e-12, unsigned threads = 0);

}  // namespace dqpt::oracle
