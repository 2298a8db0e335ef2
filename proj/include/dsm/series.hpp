#pragma once

// Truncated complex power series c[0] + c[1] w + ... + c[M] w^M.

#include <complex>
#include <cstddef>
#include <vector>

namespace dsm::series {

using complex = std::complex<double>;
using Series = std::vector<complex>;

inline Series mul(const Series& a, const Series& b) {
    const std::size_t n = a.size();
    Series out(n, complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == complex(0.0, 0.0)) continue;
        for (std::size_t j = 0; i + j < n; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

/// 1/a, requires a[0] != 0.
inline Series reciprocal(const Series& a) {
    const std::size_t n = a.size();
    Series r(n, complex(0.0, 0.0));
    const complex inv0 = 1.0 / a[0];
    r[0] = inv0;
    for (std::size_t k = 1; k < n; ++k) {
        complex s(0.0, 0.0);
        for (std::size_t j = 1; j <= k; ++j) s += a[j] * r[k - j];
        r[k] = -inv0 * s;
    }
    return r;
}

/// exp(a) via E' = a' E.
inline Series exp(const Series& a) {
    const std::size_t n = a.size();
    Series e(n, complex(0.0, 0.0));
    e[0] = std::exp(a[0]);
    for (std::size_t k = 1; k < n; ++k) {
        complex s(0.0, 0.0);
        for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a[j] * e[k - j];
        e[k] = s / static_cast<double>(k);
    }
    return e;
}

/// Horner evaluation using the first `terms` coefficients.
inline complex eval(const Series& a, complex w, std::size_t terms) {
    complex s(0.0, 0.0);
    for (std::size_t i = terms; i-- > 0;) s = s * w + a[i];
    return s;
}

inline complex eval(const Series& a, complex w) { return eval(a, w, a.size()); }

}  // namespace dsm::series
