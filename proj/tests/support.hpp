#pragma once
// Reference formulas written out independently of the library, plus small random helpers.

#include <array>
#include <cmath>
#include <complex>
#include <random>

namespace testing_support {

using V3 = std::array<double, 3>;

inline V3 ssh_d(double j1, double j2, double k) { return {-j1 - j2 * std::cos(k), j2 * std::sin(k), 0.0}; }

inline V3 kitaev_d(double bigM, double m, double c, double k) {
    return {0.0, -bigM * std::sin(k), bigM * (c * std::cos(k) - m)};
}

inline double len(const V3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

inline V3 unit(const V3& v) {
    const double n = len(v);
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline double dot3(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    V3 direction() {
        std::normal_distribution<double> nd;
        V3 v{nd(gen), nd(gen), nd(gen)};
        return unit(v);
    }
};

}  // namespace testing_support
