#pragma once

// Attracting cycles of f_{a,b} on the circle, their multipliers and
// combinatorial type, and classification of parameters into tongues.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsm/core_map.hpp"
#include "dsm/errors.hpp"

namespace dsm {

struct CycleSearchOptions {
    int burn_in = 2000;
    double detect_tol = 1e-6;
    /// InTongue requires lambda <= 1 - attracting_margin.
    double attracting_margin = 1e-6;
    int newton_max_iter = 60;
};

struct AttractingCycle {
    int period = 0;
    /// points[i+1] = f(points[i]) (mod 1), each in [0,1).
    std::vector<double> points;
    double lambda = 0.0;
    std::size_t distinguished_index = 0;
    /// F^q(points[0]) = points[0] + deck on the lift.
    std::int64_t deck = 0;
};

/// Type k/(2^q - 1) of a q-cycle, a q-periodic point of the doubling map.
struct OrbitType {
    std::int64_t k = 0;
    int q = 1;

    std::int64_t denominator() const { return (std::int64_t{1} << q) - 1; }
    double value() const { return static_cast<double>(k) / static_cast<double>(denominator()); }

    /// Type of the mirrored parameter (-a, b).
    OrbitType mirrored() const { return {(denominator() - k) % denominator(), q}; }

    friend bool operator==(const OrbitType&, const OrbitType&) = default;
};

struct TongueClassification {
    enum class Kind { NoAttractingCycleFound, InTongue };
    Kind status = Kind::NoAttractingCycleFound;
    std::optional<AttractingCycle> cycle;
    std::optional<OrbitType> type;

    bool in_tongue() const { return status == Kind::InTongue; }
};

namespace detail {

/// Point on the lift kept as integer + fractional part so that iterates of
/// size 2^q do not lose the fractional precision.
struct LiftPoint {
    std::int64_t whole = 0;
    double frac = 0.0;  // in [0,1)

    static LiftPoint from(double x) {
        const double fl = std::floor(x);
        LiftPoint lp{static_cast<std::int64_t>(fl), x - fl};
        if (lp.frac >= 1.0) {
            lp.frac -= 1.0;
            lp.whole += 1;
        }
        return lp;
    }

    double value() const { return static_cast<double>(whole) + frac; }
};

inline LiftPoint lift_step(const Parameter& p, LiftPoint y) {
    const double v = 2.0 * y.frac + lift_displacement(p, y.frac);
    const double fl = std::floor(v);
    LiftPoint out{2 * y.whole + static_cast<std::int64_t>(fl), v - fl};
    if (out.frac >= 1.0) {
        out.frac -= 1.0;
        out.whole += 1;
    }
    return out;
}

struct LiftIterate {
    LiftPoint point;
    double derivative = 1.0;
};

inline LiftIterate lift_iterate(const Parameter& p, LiftPoint y, int n) {
    LiftIterate it{y, 1.0};
    for (int j = 0; j < n; ++j) {
        it.derivative *= deriv_circle(p, it.point.frac);
        it.point = lift_step(p, it.point);
    }
    return it;
}

/// F^q(x) - x - m evaluated without forming the large lift value.
inline double periodic_residual(const Parameter& p, double x, int q, std::int64_t m, double* deriv = nullptr) {
    const LiftPoint start = LiftPoint::from(x);
    const LiftIterate it = lift_iterate(p, start, q);
    if (deriv) *deriv = it.derivative;
    return static_cast<double>(it.point.whole - start.whole - m) + (it.point.frac - start.frac);
}

inline std::int64_t deck_of(const Parameter& p, double x, int q) {
    const LiftPoint start = LiftPoint::from(x);
    const LiftIterate it = lift_iterate(p, start, q);
    return static_cast<std::int64_t>(std::nearbyint(static_cast<double>(it.point.whole - start.whole) +
                                                    (it.point.frac - start.frac)));
}

/// Newton on F^q(x) - x - m = 0 with a fixed deck transformation m.
inline std::optional<double> polish_periodic(const Parameter& p, double x0, int q, std::int64_t m,
                                             int max_iter = 60) {
    double x = x0;
    for (int it = 0; it < max_iter; ++it) {
        double d = 0.0;
        const double r = periodic_residual(p, x, q, m, &d);
        const double slope = d - 1.0;
        if (!std::isfinite(r) || std::abs(slope) < 1e-300) return std::nullopt;
        const double step = r / slope;
        x -= step;
        if (!std::isfinite(x)) return std::nullopt;
        if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(x))) {
            return x;
        }
    }
    double d = 0.0;
    if (std::abs(periodic_residual(p, x, q, m, &d)) < 1e-12) return x;
    return std::nullopt;
}

inline std::int64_t pow2m1(int q) { return (std::int64_t{1} << q) - 1; }

/// Minimal period of k/(2^q-1) under doubling.
inline int doubling_period(std::int64_t k, int q) {
    const std::int64_t den = pow2m1(q);
    std::int64_t v = k % den;
    for (int d = 1; d <= q; ++d) {
        v = (2 * v) % den;
        if (v == k % den) return d;
    }
    return q;
}

}  // namespace detail

inline double multiplier(const Parameter& p, const AttractingCycle& cycle) {
    double lambda = 1.0;
    for (double x : cycle.points) lambda *= deriv_circle(p, x);
    if (lambda >= 1.0) {
        throw Error(Status::no_attracting_cycle,
                    "cycle multiplier " + std::to_string(lambda) + " >= 1: not attracting");
    }
    return lambda;
}

/// phi_n(x) = F^n(x) / 2^n (mod 1), computed as x + sum_j (F(x_j) - 2x_j) / 2^{j+1}
/// along the circle orbit x_j. A priori error <= (1/2 + b/pi) / 2^n.
inline double semiconjugacy_phi(const Parameter& p, double x, int n) {
    if (n < 1) throw Error(Status::invalid_argument, "semiconjugacy depth must be >= 1");
    double sum = 0.0;
    double comp = 0.0;  // Kahan compensation
    double weight = 0.5;
    double xj = mod1(x);
    for (int j = 0; j < n; ++j) {
        const double term = lift_displacement(p, xj) * weight - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
        xj = eval_circle(p, xj);
        weight *= 0.5;
    }
    return mod1(mod1(x) + sum);
}

/// Cycle point whose f^q-orbit of x = 1/2 accumulates on it (orbit-phase rule).
inline std::size_t distinguished_point(const Parameter& p, const AttractingCycle& cycle,
                                       int steps = 4000) {
    const int q = cycle.period;
    if (q == 1) return 0;
    const int blocks = std::max(1, steps / q);
    double x = 0.5;
    for (int i = 0; i < blocks * q; ++i) x = eval_circle(p, x);
    std::size_t best = 0;
    double best_d = 1.0;
    for (std::size_t i = 0; i < cycle.points.size(); ++i) {
        const double d = circle_distance(x, cycle.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (best_d > 1e-6) {
        throw Error(Status::no_distinguished_point, "orbit of 1/2 does not settle on the cycle");
    }
    return best;
}

inline std::optional<AttractingCycle> find_attracting_cycle(const Parameter& p, int q_max,
                                                            const CycleSearchOptions& opt = {}) {
    if (q_max < 1) throw Error(Status::invalid_argument, "q_max must be >= 1");
    if (q_max > 30) throw Error(Status::invalid_argument, "q_max must be <= 30");
    if (p.b <= 0.0) return std::nullopt;  // doubling map: f' = 2 everywhere

    double x = 0.5;
    for (int i = 0; i < opt.burn_in; ++i) x = eval_circle(p, x);

    std::vector<double> orbit(static_cast<std::size_t>(q_max) + 1);
    orbit[0] = x;
    for (int i = 1; i <= q_max; ++i) orbit[i] = eval_circle(p, orbit[i - 1]);

    for (int q = 1; q <= q_max; ++q) {
        if (circle_distance(orbit[q], orbit[0]) >= opt.detect_tol) continue;
        const std::int64_t m = detail::deck_of(p, orbit[0], q);
        const auto polished = detail::polish_periodic(p, orbit[0], q, m, opt.newton_max_iter);
        if (!polished) continue;
        const double x0 = mod1(*polished);
        if (circle_distance(x0, orbit[0]) > 1e-3) continue;

        AttractingCycle c;
        c.period = q;
        c.deck = detail::deck_of(p, x0, q);
        c.points.reserve(q);
        double y = x0;
        double lambda = 1.0;
        bool minimal = true;
        for (int j = 0; j < q; ++j) {
            if (j > 0 && circle_distance(y, x0) < 1e-9) minimal = false;
            c.points.push_back(y);
            lambda *= deriv_circle(p, y);
            y = eval_circle(p, y);
        }
        if (!minimal || circle_distance(y, x0) > 1e-9) continue;
        if (!(lambda >= 0.0 && lambda <= 1.0 - opt.attracting_margin)) continue;
        c.lambda = lambda;
        c.distinguished_index = distinguished_point(p, c);
        return c;
    }
    return std::nullopt;
}

struct OrbitTypeOptions {
    int depth = 60;
    int max_depth = 200;
};

inline OrbitType orbit_type(const Parameter& p, const AttractingCycle& cycle, const OrbitTypeOptions& opt = {}) {
    const int q = cycle.period;
    if (q < 1 || q > 62 || cycle.points.size() != static_cast<std::size_t>(q)) {
        throw Error(Status::invalid_argument, "malformed cycle");
    }
    const std::int64_t den = detail::pow2m1(q);
    const double gap = 1.0 / static_cast<double>(den);
    const double x = cycle.points.at(cycle.distinguished_index);
    for (int n = opt.depth; n <= opt.max_depth; n += 20) {
        const double bound = displacement_bound(p) * std::ldexp(1.0, -n);
        const double v = semiconjugacy_phi(p, x, n);
        const double scaled = v * static_cast<double>(den);
        std::int64_t k = static_cast<std::int64_t>(std::nearbyint(scaled));
        const double dist = circle_distance(v, static_cast<double>(k) / static_cast<double>(den));
        k = ((k % den) + den) % den;
        if (bound < 0.25 * gap && dist < 0.25 * gap) {
            if (detail::doubling_period(k, q) != q) {
                throw Error(Status::type_ambiguous, "rounded type " + std::to_string(k) + "/" +
                                                        std::to_string(den) + " is not of exact period " +
                                                        std::to_string(q));
            }
            return {k, q};
        }
    }
    throw Error(Status::type_ambiguous, "semiconjugacy value not within a quarter gap of k/(2^q-1)");
}

inline TongueClassification classify(const Parameter& p, int q_max, const CycleSearchOptions& opt = {}) {
    TongueClassification out;
    auto cycle = find_attracting_cycle(p, q_max, opt);
    if (!cycle) return out;
    out.type = orbit_type(p, *cycle);
    out.cycle = std::move(cycle);
    out.status = TongueClassification::Kind::InTongue;
    return out;
}

}  // namespace dsm
