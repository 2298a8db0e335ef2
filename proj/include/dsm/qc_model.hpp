#pragma once

// Piecewise-linear angle map h and the radial power map
// chi(r, theta) = (r^{1+alpha}, h(theta)), extended to C by reflection.

#include <algorithm>
#include <cmath>
#include <complex>

#include "dsm/core_map.hpp"
#include "dsm/errors.hpp"

namespace dsm {

/// Increasing homeomorphism of [0, pi] with h(0) = 0, h(nu0) = nu1, h(pi) = pi.
struct AngleMap {
    double nu0 = pi / 2;
    double nu1 = pi / 2;
    double s1 = 1.0;
    double s2 = 1.0;
    double s3 = 0.0;
};

inline AngleMap make_angle_map(double nu0, double nu1) {
    if (!(nu0 > 0.0 && nu0 < pi && nu1 > 0.0 && nu1 < pi)) {
        throw Error(Status::invalid_argument, "angles must lie in (0, pi)");
    }
    AngleMap m;
    m.nu0 = nu0;
    m.nu1 = nu1;
    m.s1 = nu1 / nu0;
    m.s2 = (pi - nu1) / (pi - nu0);
    m.s3 = pi * (nu1 - nu0) / (pi - nu0);
    return m;
}

inline double angle_map_eval(const AngleMap& m, double theta) {
    if (!(theta >= 0.0 && theta <= pi)) throw Error(Status::invalid_argument, "theta outside [0, pi]");
    if (theta == m.nu0) return m.nu1;
    if (theta < m.nu0) return m.s1 * theta;
    if (theta == pi) return pi;
    return m.s2 * theta + m.s3;
}

inline double angle_map_inverse(const AngleMap& m, double phi) {
    if (!(phi >= 0.0 && phi <= pi)) throw Error(Status::invalid_argument, "angle outside [0, pi]");
    if (phi == m.nu1) return m.nu0;
    if (phi < m.nu1) return phi / m.s1;
    if (phi == pi) return pi;
    return (phi - m.s3) / m.s2;
}

struct RadialPowerMap {
    double alpha = 0.0;
    AngleMap angle_map;
};

inline RadialPowerMap make_radial_power_map(double alpha, double nu0, double nu1) {
    if (!(alpha > -1.0) || !std::isfinite(alpha)) throw Error(Status::invalid_argument, "alpha must be > -1");
    return {alpha, make_angle_map(nu0, nu1)};
}

inline complex chi_eval(const RadialPowerMap& m, complex z) {
    const double r = std::abs(z);
    if (r == 0.0) return complex(0.0, 0.0);
    const bool lower = std::signbit(z.imag());
    const double theta = std::abs(std::arg(z));
    const complex w = std::polar(std::pow(r, 1.0 + m.alpha), angle_map_eval(m.angle_map, std::min(theta, pi)));
    return lower ? std::conj(w) : w;
}

inline complex chi_inverse(const RadialPowerMap& m, complex w) {
    const double r = std::abs(w);
    if (r == 0.0) return complex(0.0, 0.0);
    const bool lower = std::signbit(w.imag());
    const double phi = std::abs(std::arg(w));
    const complex z = std::polar(std::pow(r, 1.0 / (1.0 + m.alpha)), angle_map_inverse(m.angle_map, std::min(phi, pi)));
    return lower ? std::conj(z) : z;
}

/// sup |mu_chi| = max over both sectors of |1+alpha-s| / |1+alpha+s|.
inline double dilatation_bound(const RadialPowerMap& m) {
    const double e = 1.0 + m.alpha;
    const auto branch = [e](double s) { return std::abs(e - s) / std::abs(e + s); };
    return std::max(branch(m.angle_map.s1), branch(m.angle_map.s2));
}

inline double conjugated_multiplier(const RadialPowerMap& m, double lambda0) {
    if (!(lambda0 > 0.0 && lambda0 < 1.0)) throw Error(Status::invalid_argument, "lambda0 must lie in (0,1)");
    return std::pow(lambda0, 1.0 + m.alpha);
}

}  // namespace dsm
