#pragma once

// Real and complex Double Standard Map:
//   f_{a,b}(x) = 2x + a + (b/pi) sin(2 pi x)  (mod 1)
//   g_{a,b}(z) = e^{2 pi i a} z^2 exp(b z - b/z)
// related by z = e^{2 pi i x}.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "dsm/errors.hpp"

namespace dsm {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce to [0,1) by subtracting the nearest integer.
inline double mod1(double x) {
    double r = x - std::nearbyint(x);
    if (r < 0.0) r += 1.0;
    if (r >= 1.0) r = 0.0;
    return r;
}

/// Signed representative of x mod 1 in [-1/2, 1/2].
inline double centered_mod1(double x) { return x - std::nearbyint(x); }

/// Distance between two points of R/Z.
inline double circle_distance(double x, double y) { return std::abs(centered_mod1(x - y)); }

/// A point (a,b) of the parameter space R/Z x [0,1].
/// `a` is stored as its representative in [-1/2, 1/2).
struct Parameter {
    double a = 0.0;
    double b = 0.0;

    Parameter() = default;
    Parameter(double a_in, double b_in) : a(canonical_angle(a_in)), b(b_in) {
        if (!std::isfinite(a_in) || !std::isfinite(b_in)) {
            throw Error(Status::invalid_argument, "parameter must be finite");
        }
        if (b < 0.0 || b > 1.0) {
            throw Error(Status::parameter_out_of_range,
                        "b = " + std::to_string(b_in) + " outside [0,1]");
        }
    }

    static double canonical_angle(double a) {
        double r = a - std::nearbyint(a);
        if (r >= 0.5) r -= 1.0;
        if (r < -0.5) r += 1.0;
        return r;
    }

    /// The parameter (-a, b), conjugate to this one by x -> -x.
    Parameter mirrored() const { return {-a, b}; }

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Lift F(x) = 2x + a + (b/pi) sin(2 pi x); F(x+1) = F(x) + 2.
inline double eval_lift(const Parameter& p, double x) {
    return 2.0 * x + p.a + (p.b / pi) * std::sin(two_pi * centered_mod1(x));
}

/// Displacement F(x) - 2x, which depends only on x mod 1.
inline double lift_displacement(const Parameter& p, double x) {
    return p.a + (p.b / pi) * std::sin(two_pi * centered_mod1(x));
}

inline double eval_circle(const Parameter& p, double x) { return mod1(eval_lift(p, x)); }

inline double deriv_circle(const Parameter& p, double x) {
    return 2.0 + 2.0 * p.b * std::cos(two_pi * centered_mod1(x));
}

inline double second_deriv_circle(const Parameter& p, double x) {
    return -4.0 * pi * p.b * std::sin(two_pi * centered_mod1(x));
}

/// Uniform bound on |F(x) - 2x| for the canonical representative of a.
inline double displacement_bound(const Parameter& p) { return 0.5 + p.b / pi; }

inline void require_punctured(complex z) {
    if (z == complex(0.0, 0.0)) {
        throw Error(Status::invalid_argument, "z = 0 is not in the punctured plane");
    }
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw Error(Status::invalid_argument, "z must be finite");
    }
}

inline complex rotation(const Parameter& p) { return std::polar(1.0, two_pi * p.a); }

inline complex eval_complex(const Parameter& p, complex z) {
    require_punctured(z);
    const complex e = p.b * z - p.b / z;
    // exp overflows past ~709.78 and underflows to 0 below ~-745.
    if (e.real() > 700.0 || e.real() < -700.0) {
        throw Error(Status::range_error, "g(z) leaves the representable range of C*");
    }
    const complex w = rotation(p) * z * z * std::exp(e);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()) || w == complex(0.0, 0.0)) {
        throw Error(Status::range_error, "g(z) leaves the representable range of C*");
    }
    return w;
}

/// g'(z) = g(z) (2/z + b + b/z^2).
inline complex deriv_complex(const Parameter& p, complex z) {
    const complex g = eval_complex(p, z);
    return g * (2.0 / z + p.b + p.b / (z * z));
}

/// Critical points (c1, c2) with |c1| >= 1 >= |c2|, c1 c2 = 1.
inline std::pair<complex, complex> critical_points(const Parameter& p) {
    if (p.b <= 0.0) {
        throw Error(Status::degenerate, "b = 0: g is z -> e^{2 pi i a} z^2, no critical points in C*");
    }
    const double s = std::sqrt((1.0 - p.b) * (1.0 + p.b));
    const double c1 = -(1.0 + s) / p.b;
    const double c2 = -p.b / (1.0 + s);
    return {complex(c1, 0.0), complex(c2, 0.0)};
}

/// Reflection in the unit circle, z -> 1/conj(z).
inline complex reflect(complex z) {
    require_punctured(z);
    return 1.0 / std::conj(z);
}

inline complex circle_to_plane(double x) { return std::polar(1.0, two_pi * x); }

inline double plane_to_circle(complex z) { return mod1(std::arg(z) / two_pi); }

}  // namespace dsm
