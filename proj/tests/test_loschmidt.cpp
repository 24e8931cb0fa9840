#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "dqpt/critical.hpp"
#include "dqpt/errors.hpp"
#include "dqpt/loschmidt.hpp"
#include "support.hpp"

using namespace dqpt;
namespace ts = testing_support;

namespace {

QuenchSchedule kitaev_reference(double tau) {
    const auto h02 = BlochDispersion::kitaev({1.0, 2.0, 2.0});
    return {h02, BlochDispersion::kitaev({1.0, 0.2, 5.0}), h02, tau};
}

QuenchSchedule ssh_reference(double tau) {
    const auto h02 = BlochDispersion::ssh({1.0, 0.8});
    return {h02, BlochDispersion::ssh({0.4, 0.8}), h02, tau};
}

RateCurve curve_for(const QuenchSchedule& s, Temperature temp, std::size_t n, double t_max, std::size_t steps) {
    const auto grid = critical_aligned_grid(s, n);
    const auto field = thermal_bloch(s.h0, temp, grid.points());
    const auto times = uniform_times(t_max, steps);
    return rate_function(s, field, times);
}

}  // namespace

TEST(Stage1, IdentityAtZero) {
    const auto g = amplitude_stage1_k({0.1, 0.2, 0.3}, 1.7, {0.0, 0.0, 1.0}, 0.0);
    EXPECT_EQ(g, std::complex<double>(1.0, 0.0));
}

TEST(Stage1, VanishesAtOrdinaryCriticalTime) {
    const Vec3 n1{0.0, 0.6, 0.8};
    const Vec3 nvec{0.4, 0.0, 0.0};  // orthogonal to n1
    const double w = 1.3;
    for (int n = 0; n < 3; ++n) {
        const double t = (n * kPi + kPi / 2) / w;
        EXPECT_LT(std::abs(amplitude_stage1_k(nvec, w, n1, t)), 1e-15);
    }
}

TEST(Stage1, StationaryStateIsPurePhase) {
    const Vec3 n1{0.0, 0.6, 0.8};
    const Vec3 nvec{0.0, -0.6, -0.8};
    for (double t : {0.1, 1.0, 7.3}) {
        const auto g = amplitude_stage1_k(nvec, 0.9, n1, t);
        EXPECT_NEAR(g.real(), std::cos(0.9 * t), 1e-15);
        EXPECT_NEAR(g.imag(), std::sin(0.9 * t), 1e-15);
        EXPECT_NEAR(std::abs(g), 1.0, 1e-15);
    }
}

TEST(Stage2, ContinuousAtTau) {
    ts::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto n1 = rng.direction(), n2 = rng.direction(), nd = rng.direction();
        const double r = rng(0.0, 1.0);
        const Vec3 nvec{r * nd[0], r * nd[1], r * nd[2]};
        const Vec3 a{n1[0], n1[1], n1[2]}, b{n2[0], n2[1], n2[2]};
        const double w1 = rng(0.1, 3.0), w2 = rng(0.1, 3.0), tau = rng(0.1, 5.0);
        ASSERT_EQ(amplitude_stage2_k(nvec, w1, a, tau, w2, b, tau), amplitude_stage1_k(nvec, w1, a, tau));
    }
}

TEST(Stage2, MetamorphicZeroPersists) {
    const Vec3 n1{1.0, 0.0, 0.0};
    const Vec3 n2{0.0, 0.0, 1.0};
    const Vec3 nvec{0.0, 0.0, -0.7};
    const double w1 = 0.8, w2 = 2.1;
    const double tau = (kPi / 2) / w1;
    for (double dt : {0.0, 0.3, 1.0, 10.0, 123.4}) {
        EXPECT_LT(std::abs(amplitude_stage2_k(nvec, w1, n1, tau, w2, n2, tau + dt)), 1e-15);
    }
}

TEST(Stage2, SameHamiltonianReducesToSingleQuench) {
    const Vec3 n1{0.0, 0.6, 0.8};
    const Vec3 nvec{0.3, -0.1, 0.2};
    for (double t : {1.0, 2.5, 9.0}) {
        const auto two = amplitude_stage2_k(nvec, 1.1, n1, 0.7, 1.1, n1, t);
        const auto one = amplitude_stage1_k(nvec, 1.1, n1, t);
        EXPECT_NEAR(std::abs(two - one), 0.0, 1e-14);
    }
}

TEST(Stage2, TripleProductTermCarriesImaginaryUnit) {
    // n1 = x, n2 = y, nvec = z: only the cross-product term survives the b1 b2 part
    const Vec3 x{1, 0, 0}, y{0, 1, 0}, z{0, 0, 0.5};
    const double w1 = 1.0, w2 = 1.0, tau = kPi / 2, t = tau + kPi / 2;
    const auto g = amplitude_stage2_k(z, w1, x, tau, w2, y, t);
    // a1 = a2 = 0, b1 = b2 = 1: G = -b1 b2 (x.y) + i b1 b2 z.(x cross y) = 0.5 i
    EXPECT_NEAR(g.real(), 0.0, 1e-15);
    EXPECT_NEAR(g.imag(), 0.5, 1e-15);
}

TEST(AmplitudeFull, UnityAtTimeZero) {
    const auto s = kitaev_reference(1.0);
    const auto grid = MomentumGrid::uniform(100);
    const auto field = thermal_bloch(s.h0, Temperature::from_T(5.0), grid.points());
    const auto a = amplitude_full(s, field, 0.0);
    EXPECT_EQ(a.log_modulus, 0.0);
    EXPECT_THROW(amplitude_full(s, field, -0.1), InvalidParameter);
}

TEST(AmplitudeFull, MetamorphicConfigurationVanishesAfterTau) {
    const auto probe = kitaev_reference(1.0);
    const auto report = check_metamorphic_conditions(probe, Temperature::from_T(5.0));
    ASSERT_EQ(report.momenta.size(), 2u);
    const auto s = kitaev_reference(report.momenta[1].tau_star[0]);
    const auto grid = critical_aligned_grid(s, 1000);
    const auto field = thermal_bloch(s.h0, Temperature::from_T(5.0), grid.points());
    for (double dt : {1e-9, 0.01, 0.5, 3.0}) {
        EXPECT_EQ(amplitude_full(s, field, s.tau + dt).log_modulus, -INFINITY);
    }
    EXPECT_TRUE(std::isfinite(amplitude_full(s, field, 0.5 * s.tau).log_modulus));
}

TEST(AmplitudeFull, LogSumEqualsProductOfModuli) {
    ts::Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng(0, 62));
        const QuenchSchedule s(BlochDispersion::ssh({rng(0.1, 2), rng(0.1, 2)}),
                               BlochDispersion::ssh({rng(0.1, 2), rng(0.1, 2)}),
                               BlochDispersion::ssh({rng(0.1, 2), rng(0.1, 2)}), rng(0.1, 5));
        const auto grid = MomentumGrid::uniform(n);
        const auto field = thermal_bloch(s.h0, Temperature::from_beta(rng(0.0, 5.0)), grid.points());
        const auto modes = make_modes(s, field);
        const double t = rng(0.0, 10.0);
        double product = 1.0;
        for (const auto& m : modes) product *= std::abs(amplitude_k(m, s.tau, t));
        const auto a = amplitude_full(modes, s.tau, t);
        ASSERT_NEAR(std::exp(a.log_modulus), product, 1e-10);
    }
}

TEST(RateFunction, InfiniteTemperatureSingleQuench) {
    // nvec = 0 leaves G_k = cos(w1 t) on every mode
    const auto h = BlochDispersion::ssh({0.4, 0.8});
    const QuenchSchedule s(BlochDispersion::ssh({1.0, 0.8}), h, h, 100.0);
    const auto grid = MomentumGrid::uniform(200);
    const auto field = thermal_bloch(s.h0, Temperature::from_beta(0.0), grid.points());
    const auto times = uniform_times(20.0, 101);
    const auto curve = rate_function(s, field, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        double ref = 0.0;
        for (double k : grid.points()) {
            const double w = ts::len(ts::ssh_d(0.4, 0.8, k));
            ref += std::log(std::abs(std::cos(w * times[i])));
        }
        ref *= -2.0 / 200.0;
        ASSERT_NEAR(curve.g[i], ref, 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST(RateFunction, StartsAtZeroAndIsDeterministicAcrossThreadCounts) {
    const auto s = ssh_reference(8.0);
    const auto grid = MomentumGrid::uniform(300);
    const auto field = thermal_bloch(s.h0, Temperature::from_T(3.0), grid.points());
    const auto times = uniform_times(30.0, 500);
    const auto a = rate_function(s, field, times, 1);
    const auto b = rate_function(s, field, times, 7);
    EXPECT_EQ(a.g[0], 0.0);
    ASSERT_EQ(a.g.size(), b.g.size());
    EXPECT_EQ(0, std::memcmp(a.g.data(), b.g.data(), a.g.size() * sizeof(double)));
}

TEST(Kinks, ConstantCurveHasNone) {
    RateCurve c;
    c.times = uniform_times(1.0, 200);
    c.g.assign(200, 0.25);
    c.tau = 5.0;
    EXPECT_TRUE(detect_kinks(c).empty());
}

TEST(Kinks, SmoothCurveHasNone) {
    RateCurve c;
    c.times = uniform_times(10.0, 2001);
    for (double t : c.times) c.g.push_back(0.1 * std::sin(t) + 0.01 * t * t);
    c.tau = 20.0;
    EXPECT_TRUE(detect_kinks(c).empty());
}

TEST(Kinks, FindsACusp) {
    RateCurve c;
    c.times = uniform_times(4.0, 4001);
    for (double t : c.times) c.g.push_back(0.2 + 0.05 * std::sin(t) + 0.3 * std::abs(t - 1.2345));
    c.tau = 10.0;
    const auto k = detect_kinks(c);
    ASSERT_EQ(k.size(), 1u);
    EXPECT_NEAR(k[0], 1.2345, 2e-3);
}

TEST(Kinks, RejectsNonUniformGrid) {
    RateCurve c;
    c.times = {0.0, 0.1, 0.3, 0.4, 0.5};
    c.g = {0, 0, 0, 0, 0};
    c.tau = 1.0;
    EXPECT_THROW(detect_kinks(c), InvalidParameter);
}

TEST(Kinks, SshSingleQuenchHasOneKinkNearFirstCriticalTime) {
    const auto s = ssh_reference(8.0);
    const auto curve = curve_for(s, Temperature::from_T(3.0), 1000, 7.9, 1581);
    const auto kinks = detect_kinks(curve);
    const double omega = 0.5 * BlochDispersion::ssh({0.4, 0.8})(std::acos(-13.0 / 14.0)).delta;
    ASSERT_EQ(kinks.size(), 1u);
    EXPECT_NEAR(kinks[0], (kPi / 2) / omega, 0.01);
}

TEST(Kinks, KitaevFirstStageHasTwoKinks) {
    const auto s = kitaev_reference(1.3);
    const auto curve = curve_for(s, Temperature::from_T(5.0), 1000, 1.29, 1291);
    const auto kinks = detect_kinks(curve);
    ASSERT_EQ(kinks.size(), 2u);
    EXPECT_NEAR(kinks[0], (kPi / 2) / 4.8, 0.01);
    EXPECT_NEAR(kinks[1], (3 * kPi / 2) / 4.8, 0.01);
}

TEST(UniformTimes, Endpoints) {
    const auto t = uniform_times(3.0, 31);
    ASSERT_EQ(t.size(), 31u);
    EXPECT_EQ(t.front(), 0.0);
    EXPECT_EQ(t.back(), 3.0);
    EXPECT_THROW(uniform_times(3.0, 1), InvalidParameter);
    EXPECT_THROW(uniform_times(-1.0, 10), InvalidParameter);
}
