#include "dqpt/thermal.hpp"

#include <cmath>

#include "dqpt/errors.hpp"

namespace dqpt {

Temperature Temperature::from_beta(double beta) {
    if (std::isnan(beta) || beta < 0.0) throw InvalidParameter("beta must be nonnegative");
    return Temperature(beta);
}

Temperature Temperature::from_T(double T) {
    if (std::isnan(T) || T < 0.0) throw InvalidParameter("temperature must be nonnegative");
    if (T == 0.0) return zero();
    return Temperature(1.0 / T);
}

Vec3 thermal_vector(const BlochSample& h0, Temperature temp) {
    if (h0.degenerate) return {0.0, 0.0, 0.0};
    const double weight = temp.is_zero_temperature() ? 1.0 : std::tanh(0.5 * temp.beta() * h0.delta);
    return scaled(h0.nhat, -weight);
}

ThermalBlochField thermal_bloch(const BlochDispersion& h0, Temperature temp, std::span<const double> grid) {
    if (grid.empty()) throw InvalidParameter("thermal field needs a nonempty momentum grid");
    ThermalBlochField field;
    field.grid.assign(grid.begin(), grid.end());
    field.nvec.reserve(grid.size());
    for (double k : grid) field.nvec.push_back(thermal_vector(h0(k), temp));
    return field;
}

}  // namespace dqpt
