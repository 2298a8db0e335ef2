#pragma once

// Koenigs linearization at the distinguished attracting point, the critical
// angle, the uniformization Xi = lambda e^{2 i nu} and its inverse, internal
// rays, and superattracting parameters on the line b = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/errors.hpp"
#include "dsm/series.hpp"

namespace dsm {

struct KoenigsOptions {
    double lambda_min = 1e-4;
    double lambda_margin = 1e-4;
    int jet_degree = 20;
    /// Relative agreement required between the full local series and the one
    /// truncated by `tail_terms` coefficients.
    double cauchy_tol = 1e-10;
    int tail_terms = 4;
    /// Cap on the number of q-blocks is block_budget / q.
    int block_budget = 100000;
    int q_max = 12;
};

struct KoenigsFrame {
    Parameter parameter;
    AttractingCycle cycle;
    complex x_star;
    double lambda = 0.0;
    complex normalization;  // i / x_star
    int depth = 0;          // block cap

    // Local model near x_star: h(w) with h(G(w)) = mu h(w), G(w) = g^q(x*+w) - x*.
    series::Series h;
    complex mu;
    double switch_radius = 0.0;
    std::vector<complex> other_points;
    int tail_terms = 4;
    double cauchy_tol = 1e-10;
};

struct UniformizingValue {
    complex xi;
    double lambda = 0.0;
    double nu = 0.0;
};

namespace detail {

inline series::Series compose_with_g(const Parameter& p, const series::Series& s) {
    series::Series e = s;
    const series::Series inv = series::reciprocal(s);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = p.b * s[i] - p.b * inv[i];
    series::Series out = series::mul(series::mul(s, s), series::exp(e));
    const complex rot = rotation(p);
    for (auto& c : out) c *= rot;
    return out;
}

/// Taylor jet of G(w) = g^q(x + w) - x.
inline series::Series return_map_jet(const Parameter& p, complex x, int q, int degree) {
    series::Series s(static_cast<std::size_t>(degree) + 1, complex(0.0, 0.0));
    s[0] = x;
    if (degree >= 1) s[1] = 1.0;
    for (int i = 0; i < q; ++i) s = compose_with_g(p, s);
    s[0] = 0.0;
    return s;
}

/// Koenigs coefficients h_1 = 1, h_m = sum_{j<m} h_j [G^j]_m / (mu - mu^m).
inline series::Series koenigs_coefficients(const series::Series& G) {
    const std::size_t n = G.size();
    const complex mu = G[1];
    // powers[j] = G^j truncated
    std::vector<series::Series> powers(n);
    powers[1] = G;
    for (std::size_t j = 2; j < n; ++j) powers[j] = series::mul(powers[j - 1], G);
    series::Series h(n, complex(0.0, 0.0));
    if (n > 1) h[1] = 1.0;
    complex mu_m = mu;
    for (std::size_t m = 2; m < n; ++m) {
        mu_m *= mu;
        complex s(0.0, 0.0);
        for (std::size_t j = 1; j < m; ++j) s += h[j] * powers[j][m];
        h[m] = s / (mu - mu_m);
    }
    return h;
}

inline double estimate_radius(const series::Series& h) {
    const std::size_t n = h.size();
    double rho = 1.0;
    for (std::size_t m = std::max<std::size_t>(2, n / 2); m < n; ++m) {
        const double c = std::abs(h[m]);
        if (c > 0.0 && std::isfinite(c)) rho = std::min(rho, std::pow(c, -1.0 / static_cast<double>(m)));
    }
    return rho;
}

}  // namespace detail

inline void check_lambda_window(double lambda, const KoenigsOptions& opt) {
    if (!(lambda > opt.lambda_min && lambda < 1.0 - opt.lambda_margin)) {
        throw Error(Status::outside_lambda_window,
                    "multiplier " + std::to_string(lambda) + " outside the linearization window");
    }
}

inline KoenigsFrame make_koenigs_frame(const Parameter& p, const AttractingCycle& cycle,
                                       const KoenigsOptions& opt = {}) {
    check_lambda_window(cycle.lambda, opt);
    KoenigsFrame f;
    f.parameter = p;
    f.cycle = cycle;
    f.x_star = circle_to_plane(cycle.points.at(cycle.distinguished_index));
    f.lambda = cycle.lambda;
    f.normalization = complex(0.0, 1.0) / f.x_star;
    f.depth = std::max(1, opt.block_budget / cycle.period);
    f.tail_terms = opt.tail_terms;
    f.cauchy_tol = opt.cauchy_tol;
    const auto G = detail::return_map_jet(p, f.x_star, cycle.period, opt.jet_degree);
    f.mu = G[1];
    f.h = detail::koenigs_coefficients(G);
    f.switch_radius = 0.1 * detail::estimate_radius(f.h);
    for (std::size_t i = 0; i < cycle.points.size(); ++i) {
        if (i != cycle.distinguished_index) f.other_points.push_back(circle_to_plane(cycle.points[i]));
    }
    return f;
}

/// kappa(z) = (i/x*) lim mu^{-n} (g^{nq}(z) - x*), finished with the local series.
inline complex koenigs_value(const KoenigsFrame& f, complex z) {
    require_punctured(z);
    if (z == f.x_star) return complex(0.0, 0.0);
    const int q = f.cycle.period;
    const std::size_t full = f.h.size();
    const std::size_t cut = full - static_cast<std::size_t>(f.tail_terms);
    complex w = z - f.x_star;
    complex scale(1.0, 0.0);
    const complex inv_mu = 1.0 / f.mu;
    for (int n = 0; n <= f.depth; ++n) {
        if (std::abs(w) < f.switch_radius) {
            const complex hv = series::eval(f.h, w, full);
            const complex ht = series::eval(f.h, w, cut);
            if (std::abs(hv - ht) <= f.cauchy_tol * std::abs(hv)) return f.normalization * scale * hv;
        }
        complex y = f.x_star + w;
        try {
            for (int i = 0; i < q; ++i) y = eval_complex(f.parameter, y);
        } catch (const Error&) {
            throw Error(Status::divergence, "orbit left C* before reaching the linearization disk");
        }
        for (const complex& o : f.other_points) {
            if (std::abs(y - o) < 0.25 * f.switch_radius) {
                throw Error(Status::divergence, "point lies in the basin of another cycle point");
            }
        }
        w = y - f.x_star;
        scale *= inv_mu;
        if (!std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
            throw Error(Status::divergence, "Koenigs scaling overflowed");
        }
    }
    throw Error(Status::divergence, "Koenigs iteration did not reach the linearization disk");
}

inline double critical_angle(const KoenigsFrame& f) {
    if (f.parameter.b >= 1.0) throw Error(Status::degenerate, "critical angle needs b < 1");
    const auto [c1, c2] = critical_points(f.parameter);
    const complex k1 = koenigs_value(f, c1);
    const complex k2 = koenigs_value(f, c2);
    const double nu = std::arg(k1);
    if (!(nu > 0.0 && nu < pi)) {
        throw Error(Status::critical_angle_sign, "kappa(c1) is not in the upper half-plane");
    }
    if (std::abs(std::arg(k2) + nu) > 1e-6) {
        throw Error(Status::cross_check_failed, "arg kappa(c2) != -arg kappa(c1)");
    }
    return nu;
}

inline double critical_angle(const Parameter& p, const AttractingCycle& cycle, const KoenigsOptions& opt = {}) {
    return critical_angle(make_koenigs_frame(p, cycle, opt));
}

inline UniformizingValue uniformize(const KoenigsFrame& f) {
    if (f.parameter.b >= 1.0) throw Error(Status::degenerate, "uniformization needs b < 1");
    const auto [c1, c2] = critical_points(f.parameter);
    const complex k1 = koenigs_value(f, c1);
    const complex k2 = koenigs_value(f, c2);
    const double nu = std::arg(k1);
    if (!(nu > 0.0 && nu < pi)) {
        throw Error(Status::critical_angle_sign, "kappa(c1) is not in the upper half-plane");
    }
    if (std::abs(std::arg(k2) + nu) > 1e-6) {
        throw Error(Status::cross_check_failed, "arg kappa(c2) != -arg kappa(c1)");
    }
    UniformizingValue u;
    u.lambda = f.lambda;
    u.nu = nu;
    u.xi = std::polar(f.lambda, 2.0 * nu);
    const complex alt = f.lambda * k1 / k2;
    if (std::abs(alt - u.xi) > 1e-8) {
        throw Error(Status::cross_check_failed, "lambda e^{2i nu} and lambda kappa(c1)/kappa(c2) disagree");
    }
    return u;
}

inline UniformizingValue uniformize(const Parameter& p, const KoenigsOptions& opt = {}) {
    const auto cls = classify(p, opt.q_max);
    if (!cls.in_tongue()) throw Error(Status::not_in_tongue, "parameter is not in a tongue");
    return uniformize(make_koenigs_frame(p, *cls.cycle, opt));
}

/// Raised when continuation stops; carries the last parameter that was accepted.
class ContinuationError : public Error {
public:
    ContinuationError(const std::string& what, Parameter last_good)
        : Error(Status::continuation_failed, what), last_good_(last_good) {}
    const Parameter& last_good() const noexcept { return last_good_; }

private:
    Parameter last_good_;
};

struct InversionOptions {
    KoenigsOptions koenigs;
    double max_step = 0.05;  // |dw| per continuation step
    int max_halvings = 20;
    int newton_iter = 40;
    double fd_step = 1e-6;
    double step_tol = 1e-9;
    double final_tol = 1e-10;
};

namespace detail {

struct TongueProbe {
    bool ok = false;
    complex xi;
    double lambda = 0.0;
};

/// Xi at raw coordinates (a, b), only if the point lies in tongue (q, k) inside the window.
inline TongueProbe probe_tongue(double a, double b, int q, std::int64_t k, const KoenigsOptions& opt) {
    TongueProbe out;
    if (!(b > 0.0 && b < 1.0) || !std::isfinite(a)) return out;
    try {
        const Parameter p(a, b);
        const auto cls = classify(p, opt.q_max);
        if (!cls.in_tongue() || cls.cycle->period != q || cls.type->k != k) return out;
        if (!(cls.cycle->lambda > opt.lambda_min && cls.cycle->lambda < 1.0 - opt.lambda_margin)) return out;
        const auto u = uniformize(make_koenigs_frame(p, *cls.cycle, opt));
        out.ok = true;
        out.xi = u.xi;
        out.lambda = u.lambda;
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

inline double xi_angle(complex w) {
    double t = std::arg(w);
    if (t <= 0.0) t += two_pi;
    return 0.5 * t;
}

}  // namespace detail

inline Parameter invert_uniformization(const Parameter& seed, complex target, const InversionOptions& opt = {}) {
    const auto& ko = opt.koenigs;
    const double rt = std::abs(target);
    if (!std::isfinite(rt)) throw Error(Status::invalid_argument, "target must be finite");
    if (target.imag() == 0.0 && target.real() >= 0.0) {
        throw Error(Status::invalid_argument, "target lies on the slit [0,1)");
    }
    check_lambda_window(rt, ko);

    const auto cls = classify(seed, ko.q_max);
    if (!cls.in_tongue()) throw Error(Status::not_in_tongue, "seed is not in a tongue");
    const int q = cls.cycle->period;
    const std::int64_t k = cls.type->k;

    double a = seed.a;
    double b = seed.b;
    auto cur = detail::probe_tongue(a, b, q, k, ko);
    if (!cur.ok) throw ContinuationError("seed is outside the linearization window", seed);

    // Path linear in (lambda, nu): stays inside D minus the slit.
    const double l0 = std::abs(cur.xi);
    const double n0 = detail::xi_angle(cur.xi);
    const double n1 = detail::xi_angle(target);
    const int fine = 2000;
    double length = 0.0;
    complex prev = cur.xi;
    for (int i = 1; i <= fine; ++i) {
        const double s = static_cast<double>(i) / fine;
        const complex w = std::polar(l0 + s * (rt - l0), 2.0 * (n0 + s * (n1 - n0)));
        length += std::abs(w - prev);
        prev = w;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(length / opt.max_step)));

    for (int st = 1; st <= steps; ++st) {
        const double s = static_cast<double>(st) / steps;
        const complex wt =
            st == steps ? target : std::polar(l0 + s * (rt - l0), 2.0 * (n0 + s * (n1 - n0)));
        const double tol = st == steps ? opt.final_tol : opt.step_tol;
        complex res = cur.xi - wt;
        int it = 0;
        while (std::abs(res) > tol) {
            if (++it > opt.newton_iter) {
                throw ContinuationError("Newton stalled during continuation", Parameter(a, b));
            }
            // forward difference, backward if the forward probe leaves the tongue
            auto partial = [&](double ea, double eb) {
                const double h = opt.fd_step;
                auto pr = detail::probe_tongue(a + h * ea, b + h * eb, q, k, ko);
                if (pr.ok) return (pr.xi - cur.xi) / h;
                pr = detail::probe_tongue(a - h * ea, b - h * eb, q, k, ko);
                if (pr.ok) return (cur.xi - pr.xi) / h;
                throw ContinuationError("Jacobian probe left the tongue", Parameter(a, b));
            };
            const complex da = partial(1.0, 0.0);
            const complex db = partial(0.0, 1.0);
            // Solve [da db] [x y]^T = -res as a real 2x2 system.
            const double j11 = da.real(), j12 = db.real(), j21 = da.imag(), j22 = db.imag();
            const double det = j11 * j22 - j12 * j21;
            if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
                throw ContinuationError("singular Jacobian", Parameter(a, b));
            }
            const double dx = (-res.real() * j22 + res.imag() * j12) / det;
            const double dy = (-j11 * res.imag() + j21 * res.real()) / det;
            double damp = 1.0;
            bool accepted = false;
            for (int hv = 0; hv <= opt.max_halvings; ++hv, damp *= 0.5) {
                const double na = a + damp * dx;
                const double nb = b + damp * dy;
                const auto trial = detail::probe_tongue(na, nb, q, k, ko);
                if (trial.ok && std::abs(trial.xi - wt) < std::abs(res)) {
                    a = na;
                    b = nb;
                    cur = trial;
                    res = cur.xi - wt;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) throw ContinuationError("damped Newton step rejected", Parameter(a, b));
        }
    }
    return Parameter(a, b);
}

inline std::vector<Parameter> trace_internal_ray(const Parameter& seed, double nu, const std::vector<double>& lambdas,
                                                 const InversionOptions& opt = {}) {
    if (!(nu > 0.0 && nu < pi)) throw Error(Status::invalid_argument, "ray angle must lie in (0, pi)");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] < lambdas[i - 1])) throw Error(Status::invalid_argument, "lambdas must be descending");
    }
    std::vector<Parameter> out;
    out.reserve(lambdas.size());
    Parameter cur = seed;
    for (double l : lambdas) {
        cur = invert_uniformization(cur, std::polar(l, 2.0 * nu), opt);
        out.push_back(cur);
    }
    return out;
}

struct SuperattractingParameter {
    double a = 0.0;
    OrbitType type;
};

namespace detail {

/// F_a^q(1/2) - 1/2 at b = 1 with `a` used as given (not reduced mod 1).
inline double ceiling_return(double a, int q) {
    std::int64_t whole = 0;
    double frac = 0.5;
    for (int i = 0; i < q; ++i) {
        const double v = 2.0 * frac + a + std::sin(two_pi * frac) / pi;
        const double fl = std::floor(v);
        whole = 2 * whole + static_cast<std::int64_t>(fl);
        frac = v - fl;
    }
    return static_cast<double>(whole) + (frac - 0.5);
}

}  // namespace detail

/// All a in [-1/2, 1/2) with f_{a,1}^q(1/2) = 1/2 of exact period q.
/// a -> F_a^q(1/2) is increasing and gains 2^q - 1 over one turn, so each
/// integer level has exactly one root.
inline std::vector<SuperattractingParameter> superattracting_parameters(int q) {
    if (q < 1 || q > 30) throw Error(Status::invalid_argument, "q must be in [1, 30]");
    const std::int64_t levels = detail::pow2m1(q);
    std::vector<SuperattractingParameter> out;
    for (std::int64_t n = 0; n < levels; ++n) {
        double lo = -0.5, hi = 0.5;
        const double target = static_cast<double>(n);
        if (detail::ceiling_return(lo, q) >= target) {
            hi = lo;
        } else {
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (detail::ceiling_return(mid, q) < target) lo = mid;
                else hi = mid;
            }
        }
        const double a = std::abs(detail::ceiling_return(lo, q) - target) <
                                 std::abs(detail::ceiling_return(hi, q) - target)
                             ? lo
                             : hi;
        const Parameter p(a, 1.0);
        AttractingCycle c;
        c.period = q;
        double x = 0.5;
        bool exact = true;
        for (int j = 0; j < q; ++j) {
            if (j > 0 && circle_distance(x, 0.5) < 1e-9) exact = false;
            c.points.push_back(x);
            x = eval_circle(p, x);
        }
        if (!exact) continue;
        c.lambda = 0.0;
        c.distinguished_index = 0;
        out.push_back({p.a, orbit_type(p, c)});
    }
    return out;
}

}  // namespace dsm
