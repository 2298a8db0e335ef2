#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsm/qc_model.hpp"

using namespace dsm;

namespace {

// Beltrami coefficient by central differences: (f_x + i f_y) / (f_x - i f_y).
complex fd_beltrami(const RadialPowerMap& m, complex z, double h = 1e-6) {
    const complex fx = (chi_eval(m, z + h) - chi_eval(m, z - h)) / (2 * h);
    const complex fy = (chi_eval(m, z + complex(0, h)) - chi_eval(m, z - complex(0, h))) / (2 * h);
    const complex I(0.0, 1.0);
    return (fx + I * fy) / (fx - I * fy);
}

}  // namespace

TEST(AngleMap, InterpolationAndMonotone) {
    const auto h = make_angle_map(1.0, 2.0);
    EXPECT_DOUBLE_EQ(angle_map_eval(h, 0.0), 0.0);
    EXPECT_EQ(angle_map_eval(h, 1.0), 2.0);
    EXPECT_EQ(angle_map_inverse(h, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(angle_map_eval(h, pi), pi);
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = pi * i / 1000.0;
        const double v = angle_map_eval(h, t);
        EXPECT_GT(v, prev);
        EXPECT_NEAR(angle_map_inverse(h, v), t, 1e-14);
        prev = v;
    }
    EXPECT_THROW(angle_map_eval(h, -0.1), Error);
    EXPECT_THROW(angle_map_eval(h, 3.2), Error);
    EXPECT_THROW(make_angle_map(0.0, 1.0), Error);
    EXPECT_THROW(make_angle_map(1.0, pi), Error);
}

TEST(AngleMap, IdentityCase) {
    const auto h = make_angle_map(0.7, 0.7);
    for (double t : {0.0, 0.3, 0.7, 1.9, pi}) EXPECT_NEAR(angle_map_eval(h, t), t, 1e-15);
}

TEST(RadialPowerMap, SpecialValues) {
    const auto m = make_radial_power_map(0.5, 1.2, 0.8);
    EXPECT_EQ(chi_eval(m, 0.0), complex(0.0, 0.0));
    const double r = 0.37;
    const complex w = chi_eval(m, std::polar(r, 1.2));
    EXPECT_LT(std::abs(w - std::polar(std::pow(r, 1.5), 0.8)), 1e-14);
    EXPECT_LT(std::abs(chi_eval(m, complex(0.3, 0.0)) - std::pow(0.3, 1.5)), 1e-15);
    EXPECT_LT(std::abs(chi_eval(m, complex(-0.3, 0.0)) + std::pow(0.3, 1.5)), 1e-15);
    EXPECT_THROW(make_radial_power_map(-1.0, 1.0, 1.0), Error);
}

TEST(RadialPowerMap, SymmetriesAndInverse) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ua(-0.6, 2.0), un(0.1, pi - 0.1), ur(0.0, 1.0), ut(-pi, pi);
    for (int i = 0; i < 300; ++i) {
        const auto m = make_radial_power_map(ua(rng), un(rng), un(rng));
        const complex z = std::polar(ur(rng), ut(rng));
        const complex w = chi_eval(m, z);
        EXPECT_LE(std::abs(w), 1.0);  // disk to disk
        EXPECT_LT(std::abs(chi_eval(m, std::conj(z)) - std::conj(w)), 1e-14);
        EXPECT_LT(std::abs(chi_inverse(m, w) - z), 1e-12);
        const double rho = 0.6;
        EXPECT_LT(std::abs(chi_eval(m, rho * z) - std::pow(rho, 1 + m.alpha) * w), 1e-13);
    }
}

TEST(RadialPowerMap, DilatationMatchesFiniteDifferences) {
    const auto m = make_radial_power_map(0.4, 1.0, 2.1);
    const double e = 1.4;
    const double k1 = std::abs(e - m.angle_map.s1) / (e + m.angle_map.s1);
    const double k2 = std::abs(e - m.angle_map.s2) / (e + m.angle_map.s2);
    EXPECT_NEAR(dilatation_bound(m), std::max(k1, k2), 1e-15);
    EXPECT_LT(dilatation_bound(m), 1.0);
    for (double theta : {0.3, 0.8, -0.5}) EXPECT_NEAR(std::abs(fd_beltrami(m, std::polar(0.5, theta))), k1, 1e-4);
    for (double theta : {1.5, 2.8, -2.0}) EXPECT_NEAR(std::abs(fd_beltrami(m, std::polar(0.5, theta))), k2, 1e-4);
    EXPECT_NEAR(dilatation_bound(make_radial_power_map(0.0, 1.0, 1.0)), 0.0, 1e-15);
}

TEST(RadialPowerMap, ConjugatedMultiplier) {
    const auto m = make_radial_power_map(1.0, 1.0, 1.0);
    EXPECT_NEAR(conjugated_multiplier(m, 0.25), 0.0625, 1e-15);
    const complex z(0.2, 0.3);
    EXPECT_LT(std::abs(chi_eval(m, 0.25 * z) - 0.0625 * chi_eval(m, z)), 1e-15);
    EXPECT_THROW(conjugated_multiplier(m, 1.0), Error);
}
