#pragma once

// Immediate-basin arcs, the complementary Markov partition of the circle and
// rank-n cylinders covering the maximal chaotic set C_{a,b}.
//
// Coordinates are on the lift: an arc or interval is [lo, hi] with lo in [0,1)
// and hi - lo < 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/errors.hpp"

namespace dsm {

struct BasinArc {
    double left = 0.0;   // repelling fixed point of f^q
    double point = 0.0;  // attracting cycle point, left < point < right
    double right = 0.0;  // repelling fixed point of f^q
    double deriv_left = 0.0;   // (f^q)' at left
    double deriv_right = 0.0;  // (f^q)' at right

    double length() const { return right - left; }
    bool contains(double x) const {
        const double y = left + mod1(x - left);
        return y > left && y < right;
    }
};

struct BasinArcs {
    int period = 0;
    std::vector<BasinArc> arcs;  // arcs[i] around cycle.points[i]
};

struct PartitionInterval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Monotone branch of F from R_from onto a translate R_to + shift.
struct Branch {
    int from = 0;
    int to = 0;
    std::int64_t shift = 0;
};

struct MarkovPartition {
    Parameter parameter;
    std::vector<PartitionInterval> intervals;
    std::vector<std::vector<int>> matrix;        // a_ij = 1 iff f(R_i) covers R_j
    std::vector<std::vector<int>> multiplicity;  // number of branches R_i -> R_j
    std::vector<Branch> branches;                // ordered by (from, position of image)
    double distortion = 0.0;                     // sup |f''/f'| near the partition

    std::size_t size() const { return intervals.size(); }
};

struct CylinderSet {
    int start = 0;                  // partition index of the cylinder
    int end = 0;                    // f^n maps the cylinder onto R_end + shift
    std::int64_t shift = 0;
    std::vector<int> word;          // branch indices, word[j] taken at time j
    double left = 0.0;
    double right = 0.0;
    double deriv_left = 1.0;        // (f^n)' at the endpoints
    double deriv_right = 1.0;
    double chain = 0.0;             // sum_{j<n} diam f^j(I)
    double deriv_min = 1.0;
    double deriv_max = 1.0;

    int rank() const { return static_cast<int>(word.size()); }
    double diameter() const { return right - left; }
};

namespace detail {

/// Walk from the cycle point x0 until H(x) = F^q(x) - x - m changes sign.
/// dir = +1 looks for the first zero to the right (H < 0 there), -1 to the left.
inline double scan_basin_endpoint(const Parameter& p, double x0, int q, std::int64_t m, int dir) {
    const auto H = [&](double x, double* d) { return periodic_residual(p, x, q, m, d); };
    const auto inside = [dir](double h) { return dir > 0 ? h < 0.0 : h > 0.0; };
    double x = x0 + dir * 1e-9;
    double d = 0.0;
    double h = H(x, &d);
    if (!inside(h)) throw Error(Status::polish_failed, "cycle point is not attracting on the lift");
    double travelled = 0.0;
    while (true) {
        double step = std::min(1e-3, 0.25 * std::abs(h) / std::max(1.0, std::abs(d - 1.0)));
        step = std::max(step, 1e-10);
        const double xn = x + dir * step;
        double dn = 0.0;
        const double hn = H(xn, &dn);
        travelled += step;
        if (travelled > 1.0) throw Error(Status::polish_failed, "basin arc covers the whole circle");
        if (!inside(hn)) {
            // bisection on [x, xn], then Newton
            double in = x, out = xn;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (in + out);
                if (mid == in || mid == out) break;
                if (inside(H(mid, nullptr))) in = mid;
                else out = mid;
            }
            double r = 0.5 * (in + out);
            const double lo = std::min(x, xn), hi = std::max(x, xn);
            for (int it = 0; it < 8; ++it) {
                double dr = 0.0;
                const double hr = H(r, &dr);
                if (hr == 0.0 || dr - 1.0 == 0.0) break;
                const double nr = r - hr / (dr - 1.0);
                if (!(nr >= lo && nr <= hi) || nr == r) break;
                r = nr;
            }
            return r;
        }
        x = xn;
        h = hn;
        d = dn;
    }
}

inline double fq_derivative(const Parameter& p, double x, int q) {
    double d = 1.0;
    for (int j = 0; j < q; ++j) {
        d *= deriv_circle(p, x);
        x = eval_circle(p, x);
    }
    return d;
}

}  // namespace detail

inline BasinArcs immediate_basin_arcs(const Parameter& p, const AttractingCycle& cycle) {
    const int q = cycle.period;
    if (q < 1 || cycle.points.size() != static_cast<std::size_t>(q)) {
        throw Error(Status::invalid_argument, "malformed cycle");
    }
    if (!(cycle.lambda < 1.0 - 1e-6)) throw Error(Status::no_attracting_cycle, "cycle is not attracting");
    BasinArcs out;
    out.period = q;
    for (int i = 0; i < q; ++i) {
        const double x = cycle.points[i];
        const std::int64_t m = detail::deck_of(p, x, q);
        BasinArc arc;
        arc.point = x;
        arc.right = detail::scan_basin_endpoint(p, x, q, m, +1);
        arc.left = detail::scan_basin_endpoint(p, x, q, m, -1);
        arc.deriv_left = detail::fq_derivative(p, arc.left, q);
        arc.deriv_right = detail::fq_derivative(p, arc.right, q);
        if (!(arc.deriv_left > 1.0 && arc.deriv_right > 1.0)) {
            throw Error(Status::polish_failed, "basin arc endpoint is not repelling");
        }
        for (double e : {arc.left, arc.right}) {
            if (std::abs(detail::periodic_residual(p, e, q, m)) > 1e-10) {
                throw Error(Status::polish_failed, "basin arc endpoint is not fixed by f^q");
            }
        }
        out.arcs.push_back(arc);
    }
    // f permutes the arcs: endpoints go to endpoints of the next arc
    for (int i = 0; i < q; ++i) {
        const auto& a = out.arcs[i];
        const auto& b = out.arcs[(i + 1) % q];
        if (circle_distance(eval_circle(p, a.left), b.left) > 1e-9 ||
            circle_distance(eval_circle(p, a.right), b.right) > 1e-9) {
            throw Error(Status::polish_failed, "f does not map basin arc endpoints to the next arc");
        }
    }
    double total = 0.0;
    for (const auto& a : out.arcs) total += a.length();
    if (!(total < 1.0)) throw Error(Status::polish_failed, "basin arcs overlap");
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            if (i != j && (out.arcs[i].contains(out.arcs[j].left) || out.arcs[i].contains(out.arcs[j].right))) {
                throw Error(Status::polish_failed, "basin arcs overlap");
            }
        }
    }
    return out;
}

/// Index of the arc containing x = 1/2, the arc-based distinguished point.
inline std::optional<std::size_t> distinguished_point(const BasinArcs& arcs) {
    for (std::size_t i = 0; i < arcs.arcs.size(); ++i) {
        if (arcs.arcs[i].contains(0.5)) return i;
    }
    return std::nullopt;
}

namespace detail {

/// Solve F(x) = y for x in [lo, hi], F increasing there.
inline double inverse_branch(const Parameter& p, double lo, double hi, double y) {
    const double flo = eval_lift(p, lo);
    const double fhi = eval_lift(p, hi);
    const double slack = 1e-9;
    if (y < flo - slack || y > fhi + slack) {
        throw Error(Status::branch_inversion_failed, "value outside the image of the branch");
    }
    if (y <= flo) return lo;
    if (y >= fhi) return hi;
    double a = lo, b = hi;
    double x = lo + (hi - lo) * (y - flo) / (fhi - flo);
    for (int it = 0; it < 100; ++it) {
        const double fx = eval_lift(p, x) - y;
        if (fx == 0.0) return x;
        if (fx < 0.0) a = x;
        else b = x;
        const double d = deriv_circle(p, x);
        double nx = x - fx / d;
        if (!(d > 0.0) || !(nx > a && nx < b)) nx = 0.5 * (a + b);
        if (std::abs(nx - x) <= 2e-16 * std::max(1.0, std::abs(x))) return nx;
        x = nx;
        if (b - a <= 4e-16 * std::max(1.0, std::abs(x))) return x;
    }
    return x;
}

inline bool is_endpoint(const MarkovPartition& part, double x, double tol) {
    for (const auto& r : part.intervals) {
        if (circle_distance(x, r.lo) < tol || circle_distance(x, r.hi) < tol) return true;
    }
    return false;
}

}  // namespace detail

inline MarkovPartition markov_partition(const Parameter& p, const BasinArcs& arcs) {
    const int q = arcs.period;
    if (q < 1 || arcs.arcs.size() != static_cast<std::size_t>(q)) {
        throw Error(Status::invalid_argument, "malformed basin arcs");
    }
    MarkovPartition part;
    part.parameter = p;

    // gaps between consecutive arcs in circular order
    std::vector<BasinArc> sorted = arcs.arcs;
    for (auto& a : sorted) {
        const double base = mod1(a.right);
        const double shift = base - a.right;
        a.left += shift;
        a.point += shift;
        a.right += shift;
    }
    std::sort(sorted.begin(), sorted.end(), [](const BasinArc& x, const BasinArc& y) { return x.right < y.right; });
    for (int i = 0; i < q; ++i) {
        const double lo = sorted[i].right;
        double hi = sorted[(i + 1) % q].left;
        while (hi < lo) hi += 1.0;
        while (hi - lo >= 1.0) hi -= 1.0;
        part.intervals.push_back({lo, hi});
    }

    const double tol = 1e-9;
    for (const auto& r : part.intervals) {
        for (double e : {r.lo, r.hi}) {
            if (!detail::is_endpoint(part, eval_circle(p, e), tol)) {
                throw Error(Status::markov_check_failed, "image of a partition endpoint is not an endpoint");
            }
        }
    }

    const int k = q;
    part.matrix.assign(k, std::vector<int>(k, 0));
    part.multiplicity.assign(k, std::vector<int>(k, 0));
    for (int i = 0; i < k; ++i) {
        const double ylo = eval_lift(p, part.intervals[i].lo);
        const double yhi = eval_lift(p, part.intervals[i].hi);
        struct Cand {
            double pos;
            Branch br;
        };
        std::vector<Cand> found;
        for (int j = 0; j < k; ++j) {
            const auto& r = part.intervals[j];
            const auto s_min = static_cast<std::int64_t>(std::floor(ylo - r.lo)) - 1;
            const auto s_max = static_cast<std::int64_t>(std::ceil(yhi - r.lo)) + 1;
            for (std::int64_t s = s_min; s <= s_max; ++s) {
                const double lo = r.lo + static_cast<double>(s);
                const double hi = r.hi + static_cast<double>(s);
                if (lo >= ylo - tol && hi <= yhi + tol) found.push_back({lo, {i, j, s}});
            }
        }
        std::sort(found.begin(), found.end(), [](const Cand& x, const Cand& y) { return x.pos < y.pos; });
        for (const auto& c : found) {
            part.branches.push_back(c.br);
            part.multiplicity[i][c.br.to] += 1;
            part.matrix[i][c.br.to] = 1;
        }
        if (found.empty()) throw Error(Status::markov_check_failed, "partition interval has no branch");
    }

    // sup |f''/f'| over the partition, widened by 5%
    double v = 0.0;
    for (const auto& r : part.intervals) {
        const double margin = 0.05 * r.length();
        const int n = 4000;
        for (int i = 0; i <= n; ++i) {
            const double x = r.lo - margin + (r.length() + 2 * margin) * i / n;
            v = std::max(v, std::abs(second_deriv_circle(p, x) / deriv_circle(p, x)));
        }
    }
    part.distortion = v;
    return part;
}

/// Spectral radius of the branch-multiplicity matrix (power iteration on M + I).
inline double spectral_radius(const std::vector<std::vector<int>>& m) {
    const std::size_t k = m.size();
    std::vector<double> v(k, 1.0), w(k);
    double rho = 0.0;
    for (int it = 0; it < 5000; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            w[i] = v[i];
            for (std::size_t j = 0; j < k; ++j) w[i] += m[i][j] * v[j];
        }
        double norm = 0.0;
        for (double x : w) norm = std::max(norm, std::abs(x));
        const double next = norm / *std::max_element(v.begin(), v.end()) - 1.0;
        for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / norm;
        if (it > 10 && std::abs(next - rho) < 1e-15) return next;
        rho = next;
    }
    return rho;
}

/// Some power of the 0/1 transition matrix is strictly positive.
inline bool is_primitive(const std::vector<std::vector<int>>& a) {
    const std::size_t k = a.size();
    std::vector<std::vector<int>> pw = a;
    const std::size_t bound = (k - 1) * (k - 1) + 1;
    for (std::size_t e = 1; e <= bound; ++e) {
        bool positive = true;
        for (const auto& row : pw)
            for (int x : row) positive = positive && x > 0;
        if (positive) return true;
        std::vector<std::vector<int>> nx(k, std::vector<int>(k, 0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t l = 0; l < k; ++l)
                if (pw[i][l])
                    for (std::size_t j = 0; j < k; ++j) nx[i][j] |= a[l][j];
        pw = std::move(nx);
    }
    return false;
}

inline void finish_bounds(CylinderSet& c, double distortion) {
    const double lo = std::min(c.deriv_left, c.deriv_right);
    const double hi = std::max(c.deriv_left, c.deriv_right);
    const double f = std::exp(distortion * c.chain);
    c.deriv_min = std::min(lo, hi / f);
    c.deriv_max = std::max(hi, lo * f);
}

inline std::vector<CylinderSet> rank_zero_cylinders(const MarkovPartition& part) {
    std::vector<CylinderSet> out;
    for (std::size_t i = 0; i < part.size(); ++i) {
        CylinderSet c;
        c.start = c.end = static_cast<int>(i);
        c.left = part.intervals[i].lo;
        c.right = part.intervals[i].hi;
        out.push_back(c);
    }
    return out;
}

/// Rank n+1 cylinders from rank n ones: prepend a branch and pull back.
inline std::vector<CylinderSet> next_rank(const MarkovPartition& part, const std::vector<CylinderSet>& cyl) {
    const Parameter& p = part.parameter;
    std::vector<std::vector<std::size_t>> by_start(part.size());
    for (std::size_t c = 0; c < cyl.size(); ++c) by_start[cyl[c].start].push_back(c);
    std::vector<CylinderSet> out;
    out.reserve(cyl.size() * 2);
    const int n = cyl.empty() ? 0 : cyl.front().rank();
    for (std::size_t e = 0; e < part.branches.size(); ++e) {
        const Branch& br = part.branches[e];
        const auto& R = part.intervals[br.from];
        const double s = static_cast<double>(br.shift);
        for (std::size_t idx : by_start[br.to]) {
            const CylinderSet& par = cyl[idx];
            CylinderSet c;
            c.start = br.from;
            c.end = par.end;
            c.shift = par.shift + (std::int64_t{1} << n) * br.shift;
            c.word.reserve(par.word.size() + 1);
            c.word.push_back(static_cast<int>(e));
            c.word.insert(c.word.end(), par.word.begin(), par.word.end());
            c.left = detail::inverse_branch(p, R.lo, R.hi, par.left + s);
            c.right = detail::inverse_branch(p, R.lo, R.hi, par.right + s);
            c.deriv_left = deriv_circle(p, c.left) * par.deriv_left;
            c.deriv_right = deriv_circle(p, c.right) * par.deriv_right;
            c.chain = (c.right - c.left) + par.chain;
            finish_bounds(c, part.distortion);
            out.push_back(std::move(c));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const CylinderSet& x, const CylinderSet& y) {
        return x.start != y.start ? x.start < y.start : x.left < y.left;
    });
    return out;
}

/// All rank-n cylinders; rank 0 is the partition itself.
inline std::vector<CylinderSet> refine_cylinders(const MarkovPartition& part, int n) {
    if (n < 0) throw Error(Status::invalid_argument, "rank must be >= 0");
    if (n > 40) throw Error(Status::invalid_argument, "rank must be <= 40");
    auto cyl = rank_zero_cylinders(part);
    for (int r = 0; r < n; ++r) cyl = next_rank(part, cyl);
    return cyl;
}

inline std::vector<CylinderSet> refine_cylinders(const Parameter&, const MarkovPartition& part, int n) {
    return refine_cylinders(part, n);
}

/// Subcylinder of c obtained by appending a branch: (f^n restricted to c)^{-1} of
/// the rank-one cylinder of that branch.
inline CylinderSet append_branch(const MarkovPartition& part, const CylinderSet& c, int branch) {
    const Parameter& p = part.parameter;
    const Branch& last = part.branches.at(branch);
    if (last.from != c.end) throw Error(Status::invalid_argument, "branch does not continue the word");
    const auto& Rl = part.intervals[last.from];
    const auto& Rt = part.intervals[last.to];
    // rank-one piece inside R_end
    double l = detail::inverse_branch(p, Rl.lo, Rl.hi, Rt.lo + static_cast<double>(last.shift));
    double r = detail::inverse_branch(p, Rl.lo, Rl.hi, Rt.hi + static_cast<double>(last.shift));
    double dl = deriv_circle(p, l), dr = deriv_circle(p, r);
    double chain = r - l;
    for (std::size_t j = c.word.size(); j-- > 0;) {
        const Branch& br = part.branches[c.word[j]];
        const auto& R = part.intervals[br.from];
        const double s = static_cast<double>(br.shift);
        l = detail::inverse_branch(p, R.lo, R.hi, l + s);
        r = detail::inverse_branch(p, R.lo, R.hi, r + s);
        dl *= deriv_circle(p, l);
        dr *= deriv_circle(p, r);
        chain += r - l;
    }
    CylinderSet out;
    out.start = c.start;
    out.end = last.to;
    out.shift = 2 * c.shift + last.shift;
    out.word = c.word;
    out.word.push_back(branch);
    out.left = l;
    out.right = r;
    out.deriv_left = dl;
    out.deriv_right = dr;
    out.chain = chain;
    finish_bounds(out, part.distortion);
    return out;
}

/// Adaptive cover of C by cylinders of diameter <= eps (rank capped by max_rank).
inline std::vector<CylinderSet> refine_cylinders_to_diameter(const MarkovPartition& part, double eps, int max_rank = 40) {
    if (!(eps > 0.0)) throw Error(Status::invalid_argument, "eps must be positive");
    std::vector<std::vector<int>> outgoing(part.size());
    for (std::size_t e = 0; e < part.branches.size(); ++e) outgoing[part.branches[e].from].push_back(static_cast<int>(e));
    std::vector<CylinderSet> out;
    std::vector<CylinderSet> stack = rank_zero_cylinders(part);
    std::reverse(stack.begin(), stack.end());
    while (!stack.empty()) {
        CylinderSet c = std::move(stack.back());
        stack.pop_back();
        if (c.diameter() <= eps || c.rank() >= max_rank) {
            out.push_back(std::move(c));
            continue;
        }
        const auto& outs = outgoing[c.end];
        for (std::size_t i = outs.size(); i-- > 0;) stack.push_back(append_branch(part, c, outs[i]));
    }
    std::stable_sort(out.begin(), out.end(), [](const CylinderSet& x, const CylinderSet& y) {
        return x.start != y.start ? x.start < y.start : x.left < y.left;
    });
    return out;
}

inline double cover_length(const std::vector<CylinderSet>& cylinders) {
    double total = 0.0;
    for (const auto& c : cylinders) total += c.diameter();
    return total;
}

inline double max_diameter(const std::vector<CylinderSet>& cylinders) {
    double m = 0.0;
    for (const auto& c : cylinders) m = std::max(m, c.diameter());
    return m;
}

inline std::string word_string(const CylinderSet& c) {
    std::string s = std::to_string(c.start);
    for (int w : c.word) s += "." + std::to_string(w);
    return s;
}

inline void write_cylinders_csv(std::ostream& os, const std::vector<CylinderSet>& cylinders) {
    char buf[128];
    os << "word,left,right,deriv_min,deriv_max\n";
    for (const auto& c : cylinders) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g\n", c.left, c.right, c.deriv_min, c.deriv_max);
        os << word_string(c) << buf;
    }
}

}  // namespace dsm
