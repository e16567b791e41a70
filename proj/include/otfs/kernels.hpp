// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "otfs/frame.hpp"

namespace otfs {

/// sin(pi x)/(pi x) with sinc(0) = 1.
inline double sinc(double x) {
    const double px = pi * x;
    if (std::abs(px) < 1e-8) return 1.0 - px * px / 6.0;
    return std::sin(px) / px;
}

/// Dirichlet averaging kernel D_N(x) = (1/N) sum_{n=0}^{N-1} e^{-j2pi n x},
/// evaluated as a closed-form geometric sum. |D_N(x)| = |sin(pi N x) / (N sin(pi x))|
/// for non-integer x; D_N(integer) = 1. The removable singularity is taken by a
/// series branch when |sin(pi x)| < 1e-9.
inline cplx doppler_kernel(double x, int n) {
    const double s = std::sin(pi * x);
    double ratio;
    const long long r = std::llround(x);
    const double d = x - static_cast<double>(r);
    if (std::abs(s) < 1e-9) {
        // near x = r: sin(pi N x)/(N sin(pi x)) = parity * (1 - pi^2 d^2 (N^2-1)/6 + ...)
        const double parity = ((static_cast<long long>(n) - 1) * r) % 2 == 0 ? 1.0 : -1.0;
        ratio = parity * (1.0 - pi * pi * d * d * (static_cast<double>(n) * n - 1.0) / 6.0);
    } else {
        ratio = std::sin(pi * n * x) / (n * s);
    }
    const double ph = -pi * (n - 1) * x;
    return cplx(std::cos(ph), std::sin(ph)) * ratio;
}

/// Literal N-term summation of the Dirichlet kernel; test oracle for doppler_kernel.
inline cplx doppler_kernel_sum(double x, int n) {
    cplx acc(0, 0);
    for (int i = 0; i < n; ++i) {
        const double ph = -2.0 * pi * i * x;
        acc += cplx(std::cos(ph), std::sin(ph));
    }
    return acc / static_cast<double>(n);
}

/// The two sinc-weighted overlap terms of the delay-domain kernel at subcarrier
/// offset p, before the e^{j2pi p l'/M} twiddle:
///   A(p) = (1-tau/T) e^{j pi (1+tau/T)(nu/df - p)} sinc((1-tau/T)(nu/df - p))
///   B(p) =   (tau/T) e^{j pi   (tau/T)(nu/df - p)} sinc(  (tau/T)(nu/df - p))
/// so that f_{tau,nu,k,l'}(m) = sum_p e^{j2pi p l'/M} (A(p) + e^{-j2pi k/N} B(p)).
inline void overlap_terms(double tau_t, double nu_df, double p, cplx& a, cplx& b) {
    const double xa = (1.0 - tau_t) * (nu_df - p);
    const double pa = pi * (1.0 + tau_t) * (nu_df - p);
    a = (1.0 - tau_t) * cplx(std::cos(pa), std::sin(pa)) * sinc(xa);
    const double xb = tau_t * (nu_df - p);
    const double pb = pi * tau_t * (nu_df - p);
    b = tau_t * cplx(std::cos(pb), std::sin(pb)) * sinc(xb);
}

/// Literal double-indexed sum for f_{tau,nu,k,l'}(m) over p in [-m, M-1-m].
/// Kept as the brute-force oracle for the precomputed-table path.
inline cplx f_kernel(double tau, double nu, int k, int l_prime, int m, const FrameParams& p) {
    const double tau_t = tau * p.delta_f;  // tau/T
    const double nu_df = nu * p.T();       // nu/delta_f
    const double kph = -2.0 * pi * k / p.n;
    const cplx kfac(std::cos(kph), std::sin(kph));
    cplx acc(0, 0);
    for (int q = -m; q <= p.m - 1 - m; ++q) {
        cplx a, b;
        overlap_terms(tau_t, nu_df, q, a, b);
        const double ph = 2.0 * pi * q * l_prime / p.m;
        acc += cplx(std::cos(ph), std::sin(ph)) * (a + kfac * b);
    }
    return acc;
}

/// Per-(tau, nu) partial-sum tables
///   alpha[l'][m] = sum_{p=-m}^{M-1-m} e^{j2pi p l'/M} A(p)
///   beta [l'][m] = sum_{p=-m}^{M-1-m} e^{j2pi p l'/M} B(p)
/// built once per hypothesis in O(M^2) by sharing the p-window across m.
/// f_{tau,nu,k,l'}(m) = alpha[l'][m] + e^{-j2pi k/N} beta[l'][m].
struct DelayTables {
    int m;
    std::vector<cplx> alpha;  // [l' * m + mm]
    std::vector<cplx> beta;
    std::vector<cplx> roots;  // e^{j2pi r/M}, r = 0..M-1

    DelayTables(double tau, double nu, const FrameParams& p) : m(p.m) {
        const int np = 2 * m - 1;  // p in [-(M-1), M-1]
        const double tau_t = tau * p.delta_f;
        const double nu_df = nu * p.T();
        std::vector<cplx> ta(np), tb(np);
        for (int ip = 0; ip < np; ++ip)
            overlap_terms(tau_t, nu_df, static_cast<double>(ip - (m - 1)), ta[ip], tb[ip]);

        roots.resize(m);
        for (int r = 0; r < m; ++r) {
            const double ph = 2.0 * pi * r / m;
            roots[r] = cplx(std::cos(ph), std::sin(ph));
        }

        alpha.resize(static_cast<size_t>(m) * m);
        beta.resize(static_cast<size_t>(m) * m);
        std::vector<cplx> ca(np + 1), cb(np + 1);
        for (int lp = 0; lp < m; ++lp) {
            ca[0] = cb[0] = cplx(0, 0);
            for (int ip = 0; ip < np; ++ip) {
                // e^{j2pi p l'/M} from the unit-root table, p = ip - (M-1)
                const long long r = ((static_cast<long long>(ip - (m - 1)) * lp) % m + m) % m;
                const cplx tw = roots[static_cast<size_t>(r)];
                ca[ip + 1] = ca[ip] + tw * ta[ip];
                cb[ip + 1] = cb[ip] + tw * tb[ip];
            }
            // p = -mm .. M-1-mm maps to table rows (M-1-mm) .. (2M-2-mm)
            for (int mm = 0; mm < m; ++mm) {
                alpha[static_cast<size_t>(lp) * m + mm] = ca[2 * m - 1 - mm] - ca[m - 1 - mm];
                beta[static_cast<size_t>(lp) * m + mm] = cb[2 * m - 1 - mm] - cb[m - 1 - mm];
            }
        }
    }

    cplx f(int k, int l_prime, int mm, const FrameParams& p) const {
        const double ph = -2.0 * pi * k / p.n;
        return alpha[static_cast<size_t>(l_prime) * m + mm] +
               cplx(std::cos(ph), std::sin(ph)) * beta[static_cast<size_t>(l_prime) * m + mm];
    }
};

}  // namespace otfs
