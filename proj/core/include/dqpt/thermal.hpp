#pragma once

#include <limits>
#include <span>
#include <vector>

#include "dqpt/model.hpp"

namespace dqpt {

/// Inverse temperature with k_B = 1. beta = +infinity encodes T = 0 exactly.
class Temperature {
  public:
    static Temperature from_beta(double beta);
    /// T = 0 maps to beta = +infinity.
    static Temperature from_T(double T);
    static Temperature zero() { return Temperature(std::numeric_limits<double>::infinity()); }

    double beta() const { return beta_; }
    bool is_zero_temperature() const { return beta_ == std::numeric_limits<double>::infinity(); }

  private:
    explicit Temperature(double beta) : beta_(beta) {}
    double beta_;
};

/// -tanh(beta Delta / 2) nhat for one momentum; zero at degenerate momenta.
Vec3 thermal_vector(const BlochSample& h0, Temperature temp);

struct ThermalBlochField {
    std::vector<double> grid;
    std::vector<Vec3> nvec;
};

ThermalBlochField thermal_bloch(const BlochDispersion& h0, Temperature temp, std::span<const double> grid);

}  // namespace dqpt
