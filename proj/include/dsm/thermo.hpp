#pragma once

// Topological pressure of t * psi, psi = -log f', on the repeller; Bowen's
// root t_star = dim_H C_{a,b}; dimension fields and a smoothness check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/errors.hpp"
#include "dsm/linearize.hpp"
#include "dsm/repeller.hpp"

namespace dsm {

struct PressureBracket {
    double t = 0.0;
    int rank = 0;
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    double mid() const { return 0.5 * (lower + upper); }
};

namespace detail {

/// log(sum exp(v)) without overflow.
inline double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace detail

/// Finite-rank cylinder sums (1/n) log sum_I |(f^n)'|^{-t}, bounded below with
/// deriv_max and above with deriv_min for t >= 0 (swapped for t < 0).
inline PressureBracket cylinder_pressure(const std::vector<CylinderSet>& cylinders, double t) {
    if (cylinders.empty()) throw Error(Status::invalid_argument, "no cylinders");
    const int n = cylinders.front().rank();
    if (n < 1) throw Error(Status::invalid_argument, "rank must be >= 1");
    std::vector<double> lo, hi;
    lo.reserve(cylinders.size());
    hi.reserve(cylinders.size());
    for (const auto& c : cylinders) {
        const double a = -t * std::log(c.deriv_max);
        const double b = -t * std::log(c.deriv_min);
        lo.push_back(std::min(a, b));
        hi.push_back(std::max(a, b));
    }
    return {t, n, detail::log_sum_exp(lo) / n, detail::log_sum_exp(hi) / n};
}

/// Positive eigenfunction of the transfer operator
/// (L_t h)(y) = sum over branches e into R_j of f'(x_e)^{-t} h(x_e), x_e = F_e^{-1}(y),
/// represented by Chebyshev-Lobatto interpolation on each partition interval.
class TransferEigenfunction {
public:
    TransferEigenfunction(const MarkovPartition& part, double t, int nodes = 48) : part_(&part), t_(t), n_(nodes) {
        const std::size_t k = part.size();
        const int m = n_ + 1;
        nodes_.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            const auto& R = part.intervals[i];
            for (int l = 0; l < m; ++l) {
                const double c = -std::cos(pi * l / n_);
                nodes_[i].push_back(R.lo + 0.5 * (c + 1.0) * R.length());
            }
        }
        bary_.resize(m);
        for (int l = 0; l < m; ++l) bary_[l] = ((l % 2) ? -1.0 : 1.0) * ((l == 0 || l == n_) ? 0.5 : 1.0);

        const Eigen::Index dim = static_cast<Eigen::Index>(k) * m;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t j = 0; j < k; ++j) {
            for (int l = 0; l < m; ++l) {
                const double y = nodes_[j][l];
                const Eigen::Index row = static_cast<Eigen::Index>(j) * m + l;
                for (const auto& br : part.branches) {
                    if (br.to != static_cast<int>(j)) continue;
                    const double x = inverse_branch_value(br, y);
                    const double w = std::pow(deriv_circle(part.parameter, x), -t_);
                    const auto basis = lagrange_row(br.from, x);
                    for (int c = 0; c < m; ++c) K(row, static_cast<Eigen::Index>(br.from) * m + c) += w * basis[c];
                }
            }
        }
        Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
        double eig = 0.0;
        for (int it = 0; it < 2000; ++it) {
            Eigen::VectorXd w = K * v;
            const double next = w.norm() / v.norm();
            v = w / w.norm();
            if (it > 5 && std::abs(next - eig) <= 1e-15 * next) {
                eig = next;
                break;
            }
            eig = next;
        }
        if (v.sum() < 0.0) v = -v;
        values_.assign(k, std::vector<double>(m));
        for (std::size_t i = 0; i < k; ++i)
            for (int l = 0; l < m; ++l) values_[i][l] = v(static_cast<Eigen::Index>(i) * m + l);
        eigenvalue_ = eig;
    }

    double eigenvalue() const { return eigenvalue_; }

    /// Interpolated h on R_i.
    double h(int i, double x) const {
        const auto& xs = nodes_[i];
        double num = 0.0, den = 0.0;
        for (std::size_t l = 0; l < xs.size(); ++l) {
            const double d = x - xs[l];
            if (d == 0.0) return values_[i][l];
            const double c = bary_[l] / d;
            num += c * values_[i][l];
            den += c;
        }
        return num / den;
    }

    /// (L_t h)(y) for y in R_j.
    double apply(int j, double y) const {
        double s = 0.0;
        for (const auto& br : part_->branches) {
            if (br.to != j) continue;
            const double x = inverse_branch_value(br, y);
            s += std::pow(deriv_circle(part_->parameter, x), -t_) * h(br.from, x);
        }
        return s;
    }

private:
    double inverse_branch_value(const Branch& br, double y) const {
        const auto& R = part_->intervals[br.from];
        return detail::inverse_branch(part_->parameter, R.lo, R.hi, y + static_cast<double>(br.shift));
    }

    std::vector<double> lagrange_row(int i, double x) const {
        const auto& xs = nodes_[i];
        std::vector<double> row(xs.size(), 0.0);
        double den = 0.0;
        for (std::size_t l = 0; l < xs.size(); ++l) {
            const double d = x - xs[l];
            if (d == 0.0) {
                std::fill(row.begin(), row.end(), 0.0);
                row[l] = 1.0;
                return row;
            }
            row[l] = bary_[l] / d;
            den += row[l];
        }
        for (double& r : row) r /= den;
        return row;
    }

    const MarkovPartition* part_;
    double t_;
    int n_;
    std::vector<std::vector<double>> nodes_;
    std::vector<std::vector<double>> values_;
    std::vector<double> bary_;
    double eigenvalue_ = 0.0;
};

struct PressureOptions {
    int nodes = 48;
};

/// Bracket for P(t) = log spectral radius of L_t from Collatz-Wielandt bounds
/// min/max over C of log(L_t h / h), sampled at the rank-n cylinder endpoints
/// and widened by a per-cylinder variation estimate.
inline PressureBracket pressure_bracket(const MarkovPartition& part, const std::vector<CylinderSet>& cylinders,
                                        double t, const PressureOptions& opt = {}) {
    if (cylinders.empty()) throw Error(Status::invalid_argument, "no cylinders");
    const TransferEigenfunction ef(part, t, opt.nodes);
    const auto log_ratio = [&](int j, double y) {
        const double hv = ef.h(j, y);
        const double lv = ef.apply(j, y);
        if (!(hv > 0.0) || !(lv > 0.0)) {
            throw Error(Status::cross_check_failed, "transfer eigenfunction is not positive on the repeller");
        }
        return std::log(lv / hv);
    };
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : cylinders) {
        const auto& R = part.intervals[c.start];
        const double d = c.diameter();
        const double fd = 1e-7 * R.length();
        double slope = 0.0;
        double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
        for (double y : {c.left, c.right}) {
            const double v = log_ratio(c.start, y);
            const double yp = std::min(y + fd, R.hi), ym = std::max(y - fd, R.lo);
            slope = std::max(slope, std::abs(log_ratio(c.start, yp) - log_ratio(c.start, ym)) / (yp - ym));
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        lo = std::min(lo, vmin - slope * d);
        hi = std::max(hi, vmax + slope * d);
    }
    return {t, cylinders.front().rank(), lo, hi};
}

inline PressureBracket pressure_bracket(const MarkovPartition& part, double t, int rank,
                                        const PressureOptions& opt = {}) {
    if (rank < 2) throw Error(Status::invalid_argument, "rank must be >= 2");
    return pressure_bracket(part, refine_cylinders(part, rank), t, opt);
}

struct DimensionEstimate {
    double t_star = 0.0;
    double t_lower = 0.0;
    double t_upper = 1.0;
    int rank = 0;
    bool rank_cap_reached = false;

    double width() const { return t_upper - t_lower; }
};

struct BowenOptions {
    std::vector<int> rank_schedule{8, 16, 18};
    PressureOptions pressure;
    int q_max = 12;
};

/// Partition for an in-tongue parameter.
inline MarkovPartition partition_for(const Parameter& p, int q_max = 12) {
    const auto cls = classify(p, q_max);
    if (!cls.in_tongue()) throw Error(Status::not_in_tongue, "parameter is not in a tongue");
    return markov_partition(p, immediate_basin_arcs(p, *cls.cycle));
}

inline DimensionEstimate bowen_dimension(const MarkovPartition& part, double tol, const BowenOptions& opt = {}) {
    if (!(tol > 0.0)) throw Error(Status::invalid_argument, "tolerance must be positive");
    if (opt.rank_schedule.empty()) throw Error(Status::invalid_argument, "empty rank schedule");
    std::size_t level = 0;
    std::vector<CylinderSet> cyl = refine_cylinders(part, opt.rank_schedule[0]);
    const auto bracket = [&](double t) { return pressure_bracket(part, cyl, t, opt.pressure); };

    DimensionEstimate est;
    est.t_lower = 0.0;
    est.t_upper = 1.0;
    PressureBracket at_lo = bracket(0.0);
    PressureBracket at_hi = bracket(1.0);
    if (!(at_lo.lower > 0.0 && at_hi.upper < 0.0)) {
        throw Error(Status::cross_check_failed, "pressure sign change on [0,1] not certified");
    }
    while (est.t_upper - est.t_lower > tol) {
        const double t = 0.5 * (est.t_lower + est.t_upper);
        PressureBracket b = bracket(t);
        while (b.lower <= 0.0 && b.upper >= 0.0) {
            if (level + 1 >= opt.rank_schedule.size()) {
                est.rank_cap_reached = true;
                break;
            }
            ++level;
            cyl = refine_cylinders(part, opt.rank_schedule[level]);
            b = bracket(t);
        }
        if (est.rank_cap_reached) break;
        if (b.lower > 0.0) {
            est.t_lower = t;
            at_lo = b;
        } else {
            est.t_upper = t;
            at_hi = b;
        }
    }
    est.rank = opt.rank_schedule[level];
    const double p0 = at_lo.mid(), p1 = at_hi.mid();
    double ts = 0.5 * (est.t_lower + est.t_upper);
    if (p0 - p1 > 0.0) ts = est.t_lower + (est.t_upper - est.t_lower) * p0 / (p0 - p1);
    est.t_star = std::clamp(ts, est.t_lower, est.t_upper);
    return est;
}

inline DimensionEstimate bowen_dimension(const Parameter& p, double tol, const BowenOptions& opt = {}) {
    return bowen_dimension(partition_for(p, opt.q_max), tol, opt);
}

struct DimensionRow {
    double a = 0.0;
    double b = 0.0;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double nu = std::numeric_limits<double>::quiet_NaN();
    double t_lower = std::numeric_limits<double>::quiet_NaN();
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double t_upper = std::numeric_limits<double>::quiet_NaN();
    int rank = 0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

inline DimensionRow dimension_row(const Parameter& p, int q, std::int64_t k, double tol, const BowenOptions& opt) {
    DimensionRow row;
    row.a = p.a;
    row.b = p.b;
    try {
        const auto cls = classify(p, opt.q_max);
        if (!cls.in_tongue()) {
            row.status = "no_attracting_cycle";
            return row;
        }
        if (cls.cycle->period != q || cls.type->k != k) {
            row.status = "other_tongue";
            return row;
        }
        row.lambda = cls.cycle->lambda;
        const auto est = bowen_dimension(markov_partition(p, immediate_basin_arcs(p, *cls.cycle)), tol, opt);
        row.t_lower = est.t_lower;
        row.t_star = est.t_star;
        row.t_upper = est.t_upper;
        row.rank = est.rank;
        if (est.rank_cap_reached) row.status = "rank_cap_reached";
        try {
            row.nu = uniformize(make_koenigs_frame(p, *cls.cycle)).nu;
        } catch (const Error&) {
            // nu is reported only inside the linearization window
        }
    } catch (const Error& e) {
        row.status = to_string(e.status());
    }
    return row;
}

/// Rows in grid order; workers only change the schedule, never the output.
inline std::vector<DimensionRow> dimension_field(const Parameter& seed, const std::vector<Parameter>& grid, double tol,
                                                 int workers = 1, const BowenOptions& opt = {}) {
    const auto cls = classify(seed, opt.q_max);
    if (!cls.in_tongue()) throw Error(Status::not_in_tongue, "seed is not in a tongue");
    const int q = cls.cycle->period;
    const std::int64_t k = cls.type->k;
    std::vector<DimensionRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) rows[i] = dimension_row(grid[i], q, k, tol, opt);
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return rows;
}

inline void write_dimension_csv(std::ostream& os, const std::vector<DimensionRow>& rows) {
    os << "a,b,lambda,nu,t_lower,t_star,t_upper,rank,status\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,", r.a, r.b, r.lambda, r.nu,
                      r.t_lower, r.t_star, r.t_upper, r.rank);
        os << buf << r.status << "\n";
    }
}

struct SmoothnessReport {
    bool pass = false;
    double median_width = 0.0;
    double threshold = 0.0;
    std::vector<int> degrees;
    std::vector<double> max_residuals;
    int samples = 0;
};

/// Least-squares polynomial fits in arclength; PASS when some degree <= 6 fit
/// has max residual <= 3 x median bracket width.
inline SmoothnessReport smoothness_diagnostic(const std::vector<DimensionRow>& rows) {
    std::vector<const DimensionRow*> ok;
    for (const auto& r : rows)
        if (r.ok()) ok.push_back(&r);
    if (ok.size() < 8) throw Error(Status::invalid_argument, "need at least 8 certified samples");
    const std::size_t n = ok.size();
    std::vector<double> s(n, 0.0), widths;
    for (std::size_t i = 1; i < n; ++i) {
        const double da = centered_mod1(ok[i]->a - ok[i - 1]->a);
        const double db = ok[i]->b - ok[i - 1]->b;
        const double ds = std::hypot(da, db);
        if (!(ds > 0.0)) throw Error(Status::degenerate, "repeated parameters along the path");
        s[i] = s[i - 1] + ds;
    }
    for (const auto* r : ok) widths.push_back(r->t_upper - r->t_lower);
    std::vector<double> sorted = widths;
    std::sort(sorted.begin(), sorted.end());
    const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    SmoothnessReport rep;
    rep.samples = static_cast<int>(n);
    rep.median_width = med;
    rep.threshold = 3.0 * med;
    for (int d = 3; d <= 6 && d < static_cast<int>(n); ++d) {
        Eigen::MatrixXd V(n, d + 1);
        Eigen::VectorXd y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = 2.0 * s[i] / s[n - 1] - 1.0;
            double pw = 1.0;
            for (int c = 0; c <= d; ++c, pw *= u) V(i, c) = pw;
            y(i) = ok[i]->t_star;
        }
        const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(y);
        const double res = (V * coef - y).cwiseAbs().maxCoeff();
        rep.degrees.push_back(d);
        rep.max_residuals.push_back(res);
        if (res <= rep.threshold) rep.pass = true;
    }
    return rep;
}

}  // namespace dsm
