#pragma once

// Bloch-vector form of 1D two-band Hamiltonians, H_k = E_k + (Delta_k / 2) nhat_k . sigma.

#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dqpt/vec3.hpp"

namespace dqpt {

/// Gaps below this (model energy units) are treated as closed.
inline constexpr double kGapTol = 1e-12;

struct BlochSample {
    double e = 0.0;
    double delta = 0.0;
    Vec3 nhat{1.0, 0.0, 0.0};
    bool degenerate = true;

    /// Builds a sample from the unnormalized direction vector d with Delta = 2 |d|.
    static BlochSample from_half_gap_vector(double e, const Vec3& d);
    /// Builds a sample from an explicit gap and direction; nhat is renormalized.
    static BlochSample from_gap(double e, double delta, const Vec3& direction);
};

struct SshParams {
    double j1 = 1.0;
    double j2 = 1.0;

    void validate() const;
};

struct KitaevParams {
    double bigM = 1.0;  // superconducting gap M
    double m = 0.0;     // mu / (2M)
    double c = 0.0;     // J / M

    void validate() const;
};

BlochSample ssh_bloch(const SshParams& p, double k);
BlochSample kitaev_bloch(const KitaevParams& p, double k);

/// Wraps k into the first Brillouin zone [-pi, pi).
double wrap_momentum(double k);

/// Dispersion sampled on a momentum grid; queries snap to the nearest grid point.
class TabulatedDispersion {
  public:
    static constexpr double kDefaultLookupTol = 1e-9;

    TabulatedDispersion(std::vector<double> momenta, std::vector<BlochSample> samples,
                        double lookup_tol = kDefaultLookupTol);

    const BlochSample& at(double k) const;
    std::span<const double> momenta() const { return momenta_; }
    std::span<const BlochSample> samples() const { return samples_; }
    double lookup_tol() const { return lookup_tol_; }

  private:
    std::vector<double> momenta_;
    std::vector<BlochSample> samples_;
    double lookup_tol_;
};

enum class DispersionKind { Ssh, Kitaev, Tabulated };

std::string_view to_string(DispersionKind kind);

class BlochDispersion {
  public:
    static BlochDispersion ssh(SshParams p);
    static BlochDispersion kitaev(KitaevParams p);
    static BlochDispersion tabulated(TabulatedDispersion table);

    DispersionKind kind() const;
    const SshParams* as_ssh() const { return std::get_if<SshParams>(&params_); }
    const KitaevParams* as_kitaev() const { return std::get_if<KitaevParams>(&params_); }
    const TabulatedDispersion* as_tabulated() const;

    BlochSample operator()(double k) const;

  private:
    using Table = std::shared_ptr<const TabulatedDispersion>;
    explicit BlochDispersion(std::variant<SshParams, KitaevParams, Table> params)
        : params_(std::move(params)) {}

    std::variant<SshParams, KitaevParams, Table> params_;
};

BlochSample eval_dispersion(const BlochDispersion& d, double k);

/// H0 before t = 0, H1 on [0, tau), H2 from tau on.
struct QuenchSchedule {
    BlochDispersion h0;
    BlochDispersion h1;
    BlochDispersion h2;
    double tau;

    QuenchSchedule(BlochDispersion h0_, BlochDispersion h1_, BlochDispersion h2_, double tau_);

    /// True when every stage is SSH or every stage is Kitaev.
    bool is_parity_even() const;
};

/// Strictly increasing momenta in [-pi, pi).
class MomentumGrid {
  public:
    /// k_j = -pi + 2 pi j / n, j = 0 .. n-1.
    static MomentumGrid uniform(std::size_t n);
    /// Grid built from explicit momenta; they must be strictly increasing in [-pi, pi).
    static MomentumGrid from_points(std::vector<double> momenta);

    /// Copy of this grid where the point nearest each pin is replaced by the pin itself.
    MomentumGrid with_pinned(std::span<const double> pins) const;

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }

  private:
    explicit MomentumGrid(std::vector<double> p) : points_(std::move(p)) {}
    std::vector<double> points_;
};

inline constexpr double kPi = std::numbers::pi;

}  // namespace dqpt
