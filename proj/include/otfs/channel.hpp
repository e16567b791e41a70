// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "otfs/frame.hpp"
#include "otfs/kernels.hpp"

namespace otfs {

/// Factorized single-path response for input cell (l, k):
///   hhat[l',k'] = pre * del[l'] * dopp[k']
/// with pre = e^{-j2pi nu tau}, dopp[k'] = D_N((k'-k)/N - nu T) and
/// del[l'] = (1/M) sum_m e^{j2pi (m/M)(l'-l-M tau df)} f_{tau,nu,k,l'}(m).
struct PathResponse {
    cplx pre;
    std::vector<cplx> del;   // [M]
    std::vector<cplx> dopp;  // [N]

    cplx at(int l_prime, int k_prime) const { return pre * del[l_prime] * dopp[k_prime]; }

    double energy() const {
        double ed = 0, ev = 0;
        for (const auto& v : del) ed += std::norm(v);
        for (const auto& v : dopp) ev += std::norm(v);
        return ed * ev;
    }
};

/// Delay profile del[l'] for cell column l and Doppler row k, from prebuilt
/// tables. The m-phase splits into a unit-root part for the integer offset
/// l'-l and a fractional ramp e^{-j2pi m tau df} shared by all rows.
inline std::vector<cplx> delay_profile(const DelayTables& t, double tau, int l, int k,
                                       const FrameParams& p) {
    std::vector<cplx> del(p.m);
    const double kph = -2.0 * pi * k / p.n;
    const cplx kfac(std::cos(kph), std::sin(kph));
    std::vector<cplx> ramp(p.m);
    for (int mm = 0; mm < p.m; ++mm) {
        const double ph = -2.0 * pi * mm * tau * p.delta_f;
        ramp[mm] = cplx(std::cos(ph), std::sin(ph));
    }
    for (int lp = 0; lp < p.m; ++lp) {
        cplx acc(0, 0);
        const size_t row = static_cast<size_t>(lp) * p.m;
        for (int mm = 0; mm < p.m; ++mm) {
            const cplx f = t.alpha[row + mm] + kfac * t.beta[row + mm];
            const long long r = ((static_cast<long long>(mm) * (lp - l)) % p.m + p.m) % p.m;
            acc += t.roots[static_cast<size_t>(r)] * ramp[mm] * f;
        }
        del[lp] = acc / static_cast<double>(p.m);
    }
    return del;
}

inline PathResponse path_response(double tau, double nu, int l, int k, const FrameParams& p) {
    PathResponse r;
    const double ph = -2.0 * pi * nu * tau;
    r.pre = cplx(std::cos(ph), std::sin(ph));
    DelayTables t(tau, nu, p);
    r.del = delay_profile(t, tau, l, k, p);
    r.dopp.resize(p.n);
    for (int kp = 0; kp < p.n; ++kp)
        r.dopp[kp] = doppler_kernel((kp - k) / static_cast<double>(p.n) - nu * p.T(), p.n);
    return r;
}

/// Effective DD channel gain hhat[l',k',l,k] summed over the channel paths.
inline cplx effective_gain(int l_prime, int k_prime, int l, int k, const ChannelState& ch,
                           const FrameParams& p) {
    cplx acc(0, 0);
    for (const auto& path : ch.paths)
        acc += path.gain * path_response(path.tau, path.nu, l, k, p).at(l_prime, k_prime);
    return acc;
}

/// Element of B_q in row k'M+l'+1 and the column of a unit-gain path: the
/// 1-based column index q encodes the input cell as k = floor((q-1)/M), l = (q-1) mod M.
inline cplx b_element(int q, const ChannelPath& path, int l_prime, int k_prime,
                      const FrameParams& p) {
    if (q < 1 || q > p.size()) throw std::out_of_range("b_element: q out of range");
    const int k = (q - 1) / p.m;
    const int l = (q - 1) % p.m;
    return path_response(path.tau, path.nu, l, k, p).at(l_prime, k_prime);
}

/// Received-pilot column a(tau, nu): sqrt(MN E_p) times the unit response to the
/// pilot cell, in the flat k*M + l ordering. The truncated variant keeps only the
/// support_region entries and zeroes the rest.
struct PilotColumn {
    DdVector a;
    double tau = 0;
    double nu = 0;
};

inline PilotColumn a_column(double tau, double nu, const FrameParams& p, bool truncated = false) {
    PilotColumn col;
    col.tau = tau;
    col.nu = nu;
    col.a = DdVector(p);
    const double scale = std::sqrt(static_cast<double>(p.m) * p.n * p.pilot_energy);
    const PathResponse r = path_response(tau, nu, p.pilot_l, p.pilot_k, p);
    if (truncated) {
        for (int idx : support_region(p)) {
            const int lp = idx % p.m, kp = idx / p.m;
            col.a.data[idx] = scale * r.at(lp, kp);
        }
    } else {
        for (int kp = 0; kp < p.n; ++kp) {
            const cplx d = scale * r.pre * r.dopp[kp];
            for (int lp = 0; lp < p.m; ++lp) col.a.data[kp * p.m + lp] = d * r.del[lp];
        }
    }
    return col;
}

// ---------------------------------------------------------------------------
// Effective channel matrix G
// ---------------------------------------------------------------------------

struct AssembleOptions {
    double threshold = 0.0;  // relative sparsity threshold; 0 = exact dense
    int dense_cap = 4096;    // largest MN stored dense
    int hard_cap = 16384;    // absolute MN limit
};

/// MN x MN effective DD channel; column q (0-based) maps input cell
/// (l = q mod M, k = q / M) to the received frame. Dense below dense_cap,
/// otherwise sparse with thresholded storage.
class EffectiveChannelMatrix {
public:
    enum class Source { ground_truth, estimates };

    EffectiveChannelMatrix() = default;

    static EffectiveChannelMatrix zero(const FrameParams& p) {
        EffectiveChannelMatrix g;
        g.params_ = p;
        g.size_ = p.size();
        g.dense_.assign(static_cast<size_t>(g.size_) * g.size_, cplx(0, 0));
        g.is_dense_ = true;
        g.source_ = Source::estimates;
        return g;
    }

    const FrameParams& params() const { return params_; }
    int size() const { return size_; }
    bool is_dense() const { return is_dense_; }
    Source source() const { return source_; }
    void set_source(Source s) { source_ = s; }

    cplx entry(int row, int col) const {
        if (is_dense_) return dense_[static_cast<size_t>(col) * size_ + row];
        for (const auto& [r, v] : sparse_[col])
            if (r == row) return v;
        return cplx(0, 0);
    }

    std::vector<cplx> column(int col) const {
        std::vector<cplx> out(size_, cplx(0, 0));
        if (is_dense_) {
            std::copy_n(dense_.begin() + static_cast<size_t>(col) * size_, size_, out.begin());
        } else {
            for (const auto& [r, v] : sparse_[col]) out[r] = v;
        }
        return out;
    }

    DdVector matvec(const DdVector& x) const {
        if (static_cast<int>(x.data.size()) != size_)
            throw std::invalid_argument("matvec: size mismatch");
        DdVector y(params_);
        if (is_dense_) {
            for (int c = 0; c < size_; ++c) {
                const cplx xc = x.data[c];
                if (xc == cplx(0, 0)) continue;
                const cplx* col = dense_.data() + static_cast<size_t>(c) * size_;
                for (int r = 0; r < size_; ++r) y.data[r] += col[r] * xc;
            }
        } else {
            for (int c = 0; c < size_; ++c) {
                const cplx xc = x.data[c];
                if (xc == cplx(0, 0)) continue;
                for (const auto& [r, v] : sparse_[c]) y.data[r] += v * xc;
            }
        }
        return y;
    }

    double frob_norm2() const {
        double s = 0;
        if (is_dense_)
            for (const auto& v : dense_) s += std::norm(v);
        else
            for (const auto& col : sparse_)
                for (const auto& [r, v] : col) s += std::norm(v);
        return s;
    }

    double frob_diff2(const EffectiveChannelMatrix& other) const {
        if (size_ != other.size_) throw std::invalid_argument("frob_diff2: size mismatch");
        double s = 0;
        for (int c = 0; c < size_; ++c) {
            const auto a = column(c);
            const auto b = other.column(c);
            for (int r = 0; r < size_; ++r) s += std::norm(a[r] - b[r]);
        }
        return s;
    }

    friend EffectiveChannelMatrix assemble_G(const ChannelState&, const FrameParams&,
                                             const AssembleOptions&);

private:
    FrameParams params_;
    int size_ = 0;
    Source source_ = Source::ground_truth;
    bool is_dense_ = true;
    std::vector<cplx> dense_;                                // column-major
    std::vector<std::vector<std::pair<int, cplx>>> sparse_;  // per-column (row, value)
};

/// Assemble G column by column: column q is B_q(tau, nu) h.
inline EffectiveChannelMatrix assemble_G(const ChannelState& ch, const FrameParams& p,
                                         const AssembleOptions& opt = {}) {
    if (ch.paths.empty()) throw std::invalid_argument("assemble_G: empty channel");
    const int mn = p.size();
    if (mn > opt.hard_cap)
        throw std::length_error("assemble_G: MN exceeds the configured size cap");

    EffectiveChannelMatrix g;
    g.params_ = p;
    g.size_ = mn;
    g.is_dense_ = mn <= opt.dense_cap && opt.threshold == 0.0;

    // Per-path overlap tables are (l,k)-independent; build once.
    std::vector<DelayTables> tables;
    tables.reserve(ch.paths.size());
    for (const auto& path : ch.paths) tables.emplace_back(path.tau, path.nu, p);

    const double thr = g.is_dense_ ? 0.0 : (opt.threshold > 0 ? opt.threshold : 1e-6);
    if (g.is_dense_)
        g.dense_.assign(static_cast<size_t>(mn) * mn, cplx(0, 0));
    else
        g.sparse_.resize(mn);

    double max_abs = 0;
    std::vector<cplx> col(mn);
    for (int q = 0; q < mn; ++q) {
        const int l = q % p.m, k = q / p.m;
        std::fill(col.begin(), col.end(), cplx(0, 0));
        for (size_t i = 0; i < ch.paths.size(); ++i) {
            const auto& path = ch.paths[i];
            const auto del = delay_profile(tables[i], path.tau, l, k, p);
            const double ph = -2.0 * pi * path.nu * path.tau;
            const cplx pre = path.gain * cplx(std::cos(ph), std::sin(ph));
            for (int kp = 0; kp < p.n; ++kp) {
                const cplx d =
                    pre * doppler_kernel((kp - k) / static_cast<double>(p.n) - path.nu * p.T(), p.n);
                for (int lp = 0; lp < p.m; ++lp) col[kp * p.m + lp] += d * del[lp];
            }
        }
        if (g.is_dense_) {
            std::copy(col.begin(), col.end(), g.dense_.begin() + static_cast<size_t>(q) * mn);
        } else {
            for (int r = 0; r < mn; ++r) {
                const double a = std::abs(col[r]);
                max_abs = std::max(max_abs, a);
                if (a >= thr * max_abs && a > 0) g.sparse_[q].emplace_back(r, col[r]);
            }
        }
    }
    if (!g.is_dense_) {
        // final prune against the global maximum
        for (auto& c : g.sparse_) {
            std::erase_if(c, [&](const auto& e) { return std::abs(e.second) < thr * max_abs; });
            c.shrink_to_fit();
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Column coherence (direct and Dirichlet-factorized) and cross-column Gram terms
// ---------------------------------------------------------------------------

/// |a1^H a2| / (||a1|| ||a2||) by direct inner product over the full columns.
inline double column_coherence(double tau1, double nu1, double tau2, double nu2,
                               const FrameParams& p) {
    const auto a1 = a_column(tau1, nu1, p).a;
    const auto a2 = a_column(tau2, nu2, p).a;
    cplx ip(0, 0);
    double n1 = 0, n2 = 0;
    for (int i = 0; i < p.size(); ++i) {
        ip += std::conj(a1.data[i]) * a2.data[i];
        n1 += std::norm(a1.data[i]);
        n2 += std::norm(a2.data[i]);
    }
    return std::abs(ip) / std::sqrt(n1 * n2);
}

/// Same quantity through the factorization
///   |a1^H a2| = MN E_p |sum_l' g1*[l'] g2[l']| |sin(pi N dnu T) / (N sin(pi dnu T))|
/// with g_i the delay profile of path i at the pilot cell.
inline double closed_form_coherence(double tau1, double nu1, double tau2, double nu2,
                                    const FrameParams& p) {
    DelayTables t1(tau1, nu1, p), t2(tau2, nu2, p);
    const auto g1 = delay_profile(t1, tau1, p.pilot_l, p.pilot_k, p);
    const auto g2 = delay_profile(t2, tau2, p.pilot_l, p.pilot_k, p);
    cplx ip(0, 0);
    double n1 = 0, n2 = 0;
    for (int lp = 0; lp < p.m; ++lp) {
        ip += std::conj(g1[lp]) * g2[lp];
        n1 += std::norm(g1[lp]);
        n2 += std::norm(g2[lp]);
    }
    const double dirichlet = std::abs(doppler_kernel((nu1 - nu2) * p.T(), p.n));
    return std::abs(ip) * dirichlet / std::sqrt(n1 * n2);
}

/// Closed-form sum over all MN columns of the per-column inner products
/// between two unit-gain path signatures:
///   sum_q b_q(tau_i,nu_i)^H b_q(tau_j,nu_j)
/// Collapsing the Doppler sums leaves a Dirichlet factor in (nu_i - nu_j) and a
/// delay-table cross sum; the e^{-j2pi k/N} cross terms cancel for N >= 2.
/// With i = j this is the squared Frobenius norm of a unit path's G.
inline cplx path_cross_gram_tables(const DelayTables& ti, const DelayTables& tj, double tau_i,
                                   double nu_i, double tau_j, double nu_j,
                                   const FrameParams& p) {
    const int m = p.m;
    cplx inner(0, 0);
    for (int mm = 0; mm < m; ++mm) {
        cplx s(0, 0);
        for (int lp = 0; lp < m; ++lp) {
            const size_t idx = static_cast<size_t>(lp) * m + mm;
            if (p.n > 1) {
                s += std::conj(ti.alpha[idx]) * tj.alpha[idx] +
                     std::conj(ti.beta[idx]) * tj.beta[idx];
            } else {
                s += std::conj(ti.alpha[idx] + ti.beta[idx]) * (tj.alpha[idx] + tj.beta[idx]);
            }
        }
        const double ph = 2.0 * pi * mm * p.delta_f * (tau_i - tau_j);
        inner += cplx(std::cos(ph), std::sin(ph)) * s;
    }
    inner *= static_cast<double>(p.n > 1 ? p.n : 1) / static_cast<double>(m);

    const double phi = 2.0 * pi * (nu_i * tau_i - nu_j * tau_j);
    const cplx pre(std::cos(phi), std::sin(phi));
    return pre * doppler_kernel((nu_i - nu_j) * p.T(), p.n) * inner;
}

inline cplx path_cross_gram(double tau_i, double nu_i, double tau_j, double nu_j,
                            const FrameParams& p) {
    DelayTables ti(tau_i, nu_i, p), tj(tau_j, nu_j, p);
    return path_cross_gram_tables(ti, tj, tau_i, nu_i, tau_j, nu_j, p);
}

/// ||G(paths)||_F^2 through the closed-form Gram terms, no matrix materialized.
inline double frob_norm2_from_paths(const std::vector<ChannelPath>& paths,
                                    const FrameParams& p) {
    const size_t L = paths.size();
    double total = 0;
    for (size_t i = 0; i < L; ++i) {
        for (size_t j = i; j < L; ++j) {
            const cplx g = path_cross_gram(paths[i].tau, paths[i].nu, paths[j].tau,
                                           paths[j].nu, p);
            const cplx term = std::conj(paths[i].gain) * paths[j].gain * g;
            total += (i == j) ? term.real() : 2.0 * term.real();
        }
    }
    return total;
}

}  // namespace otfs
