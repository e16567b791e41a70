// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"
#include "otfs/kernels.hpp"

namespace otfs {

struct EstimatorConfig {
    int m_tau = 6;
    int n_nu = 6;
    double epsilon = 1e-4;  // tolerance on the normalized residual-energy decrement
    int t_max = 15;
    // Normalizer for the residual-energy trace ("Avg. Rx. Pilot Signal Power").
    // 0 selects the default MN*E_p, the expected received pilot energy for a
    // unit-power channel.
    double avg_rx_pilot_power = 0;
    bool truncated_support = true;  // objective inner products over the support region only

    void validate() const {
        if (m_tau < 1 || n_nu < 1) throw std::invalid_argument("EstimatorConfig: refinements >= 1");
        if (epsilon <= 0) throw std::invalid_argument("EstimatorConfig: epsilon must be positive");
        if (t_max < 1) throw std::invalid_argument("EstimatorConfig: T_max must be >= 1");
    }
};

enum class Termination { max_iterations, tolerance };

/// Instrumentation of the search work an estimator performed.
struct OpCounters {
    long long hypothesis_evals = 0;      // refined points scored (2-D grid for M-MLE)
    long long inner_product_elems = 0;   // complex MACs inside hypothesis scoring
    long long delay_hypotheses = 0;      // TSE delay step
    long long delay_elems = 0;
    long long doppler_hypotheses = 0;    // TSE Doppler step
    long long doppler_elems = 0;

    long long total_elems() const { return inner_product_elems + delay_elems + doppler_elems; }
};

struct PathEstimates {
    std::vector<cplx> gains;
    std::vector<double> taus;
    std::vector<double> nus;
    std::vector<double> residual_energies;  // e^(1), ..., e^(final)
    int iterations_run = 0;
    Termination terminated_by = Termination::tolerance;
    OpCounters counters;
    int peaks_outside_support = 0;

    size_t size() const { return gains.size(); }

    ChannelState to_channel() const {
        ChannelState ch;
        ch.paths.reserve(gains.size());
        for (size_t i = 0; i < gains.size(); ++i)
            ch.paths.push_back({gains[i], taus[i], nus[i]});
        return ch;
    }
};

/// DD-domain pilot frame: sqrt(MN E_p) on the pilot DDRE, zero elsewhere.
inline DdVector make_pilot_frame(const FrameParams& p) {
    DdVector x(p);
    x.data[flat_index(p.pilot_l, p.pilot_k, p)] =
        std::sqrt(static_cast<double>(p.m) * p.n * p.pilot_energy);
    return x;
}

namespace detail {

/// Pilot-column values on a restricted delay-row x Doppler-row window, cheap
/// enough to evaluate per hypothesis. Rows are DD delay indices l', cols are
/// DD Doppler indices k'.
struct SupportWindow {
    std::vector<int> delay_rows;    // l' values, support delay extent
    std::vector<int> doppler_cols;  // k' values
    std::vector<int> flat;          // flat indices, doppler-major, aligned with values()

    static SupportWindow full(const FrameParams& p) {
        SupportWindow w;
        w.delay_rows.resize(p.m);
        for (int l = 0; l < p.m; ++l) w.delay_rows[l] = l;
        w.doppler_cols.resize(p.n);
        for (int k = 0; k < p.n; ++k) w.doppler_cols[k] = k;
        w.build_flat(p);
        return w;
    }

    static SupportWindow support(const FrameParams& p) {
        SupportWindow w;
        const int mt = p.m_tau(), nv = p.n_nu();
        w.delay_rows.reserve(mt);
        for (int dl = 0; dl < mt; ++dl) w.delay_rows.push_back((p.pilot_l + dl) % p.m);
        w.doppler_cols.reserve(nv);
        for (int dk = -(nv / 2); dk <= nv / 2; ++dk)
            w.doppler_cols.push_back(((p.pilot_k + dk) % p.n + p.n) % p.n);
        w.build_flat(p);
        return w;
    }

    void build_flat(const FrameParams& p) {
        flat.clear();
        flat.reserve(delay_rows.size() * doppler_cols.size());
        for (int k : doppler_cols)
            for (int l : delay_rows) flat.push_back(k * p.m + l);
    }

    size_t size() const { return flat.size(); }
};

/// Delay profile restricted to the window's rows; O(M) per row from the tables.
inline void delay_profile_rows(const DelayTables& t, double tau, int l, int k,
                               const FrameParams& p, const std::vector<int>& rows,
                               std::vector<cplx>& out) {
    out.resize(rows.size());
    const double kph = -2.0 * pi * k / p.n;
    const cplx kfac(std::cos(kph), std::sin(kph));
    std::vector<cplx> ramp(p.m);
    for (int mm = 0; mm < p.m; ++mm) {
        const double ph = -2.0 * pi * mm * tau * p.delta_f;
        ramp[mm] = cplx(std::cos(ph), std::sin(ph));
    }
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        const int lp = rows[ri];
        const size_t row = static_cast<size_t>(lp) * p.m;
        cplx acc(0, 0);
        for (int mm = 0; mm < p.m; ++mm) {
            const cplx f = t.alpha[row + mm] + kfac * t.beta[row + mm];
            const long long r = ((static_cast<long long>(mm) * (lp - l)) % p.m + p.m) % p.m;
            acc += t.roots[static_cast<size_t>(r)] * ramp[mm] * f;
        }
        out[ri] = acc / static_cast<double>(p.m);
    }
}

/// a(tau, nu) evaluated on the window only, in the window's doppler-major order.
inline void window_column(double tau, double nu, const FrameParams& p, const SupportWindow& w,
                          std::vector<cplx>& out) {
    const double scale = std::sqrt(static_cast<double>(p.m) * p.n * p.pilot_energy);
    DelayTables t(tau, nu, p);
    std::vector<cplx> del;
    delay_profile_rows(t, tau, p.pilot_l, p.pilot_k, p, w.delay_rows, del);
    const double ph = -2.0 * pi * nu * tau;
    const cplx pre = scale * cplx(std::cos(ph), std::sin(ph));
    out.resize(w.size());
    size_t idx = 0;
    for (int k : w.doppler_cols) {
        const cplx d = pre * doppler_kernel((k - p.pilot_k) / static_cast<double>(p.n) - nu * p.T(),
                                            p.n);
        for (size_t ri = 0; ri < w.delay_rows.size(); ++ri) out[idx++] = d * del[ri];
    }
}

inline int argmax_energy(const std::vector<cplx>& x) {
    int best = 0;
    double be = -1;
    for (size_t i = 0; i < x.size(); ++i) {
        const double e = std::norm(x[i]);
        if (e > be) {
            be = e;
            best = static_cast<int>(i);
        }
    }
    return best;
}

inline double clamp_tau(double tau, const FrameParams& p) {
    return std::clamp(tau, 0.0, p.tau_max);
}

/// Delay cell for a detected peak, as a signed circular offset from the pilot.
/// A peak behind the pilot row is the left tail of a near-zero-delay path, so
/// the hypothesis center must sit near zero rather than wrap to ~T (which the
/// [0, tau_max] clamp would turn into a useless far-edge hypothesis whose
/// negligible fit can fire the energy-stall stop rule prematurely).
inline int peak_delay_cell(int l_peak, const FrameParams& p) {
    int dl = ((l_peak - p.pilot_l) % p.m + p.m) % p.m;
    if (dl >= (p.m + 1) / 2) dl -= p.m;
    return dl;
}

}  // namespace detail

/// Objective Phi(tau, nu) = |a(tau,nu)^H residual|^2, evaluated over the pilot
/// support region by default (full-vector mode for oracle tests).
inline double objective_phi(double tau, double nu, const DdVector& residual, const FrameParams& p,
                            bool truncated = true) {
    const auto w = truncated ? detail::SupportWindow::support(p) : detail::SupportWindow::full(p);
    std::vector<cplx> a;
    detail::window_column(tau, nu, p, w, a);
    cplx ip(0, 0);
    for (size_t i = 0; i < w.flat.size(); ++i) ip += std::conj(a[i]) * residual.data[w.flat[i]];
    return std::norm(ip);
}

/// Per-path gain for a fixed hypothesis: least-squares fit of the residual on
/// the full column, hhat = a^H x / ||a||^2. The column norm equals MN E_p up to
/// the receiver's out-of-band truncation on fractional-Doppler paths, so the
/// exact norm is used rather than the nominal constant; this makes the
/// subsequent cancellation exact.
inline cplx gain_estimate(double tau_hat, double nu_hat, const DdVector& residual,
                          const FrameParams& p) {
    const auto col = a_column(tau_hat, nu_hat, p);
    cplx ip(0, 0);
    double n2 = 0;
    for (int i = 0; i < p.size(); ++i) {
        ip += std::conj(col.a.data[i]) * residual.data[i];
        n2 += std::norm(col.a.data[i]);
    }
    return ip / n2;
}

namespace detail {

struct IterationState {
    DdVector residual;
    double normalizer;
    std::vector<double> energies;
    PathEstimates out;
    std::vector<int> support_flags;  // 1 if flat index inside support region

    IterationState(const DdVector& x, const FrameParams& p, const EstimatorConfig& cfg)
        : residual(x) {
        normalizer = cfg.avg_rx_pilot_power > 0
                         ? cfg.avg_rx_pilot_power
                         : static_cast<double>(p.m) * p.n * p.pilot_energy;
        energies.push_back(residual.energy() / normalizer);
        support_flags.assign(p.size(), 0);
        for (int idx : support_region(p)) support_flags[idx] = 1;
    }

    /// Subtract hhat * a(tau, nu) (full column) and record the new energy.
    void cancel(cplx hhat, double tau, double nu, const FrameParams& p) {
        const auto col = a_column(tau, nu, p);
        for (int i = 0; i < p.size(); ++i) residual.data[i] -= hhat * col.a.data[i];
        energies.push_back(residual.energy() / normalizer);
    }

    /// Append or, when the grid returned an already-used point, merge.
    void record(cplx hhat, double tau, double nu) {
        for (size_t i = 0; i < out.taus.size(); ++i) {
            if (out.taus[i] == tau && out.nus[i] == nu) {
                out.gains[i] += hhat;
                return;
            }
        }
        out.gains.push_back(hhat);
        out.taus.push_back(tau);
        out.nus.push_back(nu);
    }

    /// Step-16 rule with the post-incremented counter: stop at t = T_max or
    /// when the last two recorded energies differ by at most epsilon.
    bool done(int t, const EstimatorConfig& cfg, PathEstimates& res) const {
        const size_t n = energies.size();
        if (t >= cfg.t_max) {
            res.terminated_by = Termination::max_iterations;
            return true;
        }
        if (std::abs(energies[n - 1] - energies[n - 2]) <= cfg.epsilon) {
            res.terminated_by = Termination::tolerance;
            return true;
        }
        return false;
    }
};

}  // namespace detail

/// Modified maximum-likelihood estimator: per iteration, find the
/// highest-energy DDRE, maximize Phi over the 2-D refined grid of that cell,
/// fit the path gain, cancel the reconstructed contribution, and repeat until
/// the residual energy stalls or T_max is reached.
inline PathEstimates mmle_estimate(const DdVector& x_p_hat, const EstimatorConfig& cfg,
                                   const FrameParams& p) {
    cfg.validate();
    detail::IterationState st(x_p_hat, p, cfg);
    const auto window = cfg.truncated_support ? detail::SupportWindow::support(p)
                                              : detail::SupportWindow::full(p);
    std::vector<cplx> a;
    int t = 1;
    while (true) {
        const int q = detail::argmax_energy(st.residual.data);
        if (!st.support_flags[q]) ++st.out.peaks_outside_support;
        const auto [l, k] = unflatten(q, p);
        const int dl = detail::peak_delay_cell(l, p);
        const int dk = signed_doppler_index(k - p.pilot_k, p.n);

        const auto taus = refined_grid_tau(dl, cfg.m_tau, p);
        const auto nus = refined_grid_nu(dk, cfg.n_nu, p);
        double best_phi = -1;
        double best_tau = 0, best_nu = 0;
        for (const double nu : nus) {
            for (const double tau_raw : taus) {
                const double tau = detail::clamp_tau(tau_raw, p);
                detail::window_column(tau, nu, p, window, a);
                cplx ip(0, 0);
                for (size_t i = 0; i < window.flat.size(); ++i)
                    ip += std::conj(a[i]) * st.residual.data[window.flat[i]];
                const double phi = std::norm(ip);
                ++st.out.counters.hypothesis_evals;
                st.out.counters.inner_product_elems += static_cast<long long>(window.size());
                if (phi > best_phi) {
                    best_phi = phi;
                    best_tau = tau;
                    best_nu = nu;
                }
            }
        }

        const cplx hhat = gain_estimate(best_tau, best_nu, st.residual, p);
        st.record(hhat, best_tau, best_nu);
        st.cancel(hhat, best_tau, best_nu, p);
        ++t;
        ++st.out.iterations_run;
        if (st.done(t, cfg, st.out)) break;
    }
    st.out.residual_energies = st.energies;
    return st.out;
}

/// TSE delay step: maximize |a_{k''}(tau, (k''-k_p) df/N)^H d_{k''}|^2 over the
/// 1-D refined delay grid of the peak cell, where d_{k''} is the peak column of
/// the residual matrix. Returns the delay estimate.
inline double tse_delay_step(const DdVector& residual, int k_peak, int l_peak,
                             const EstimatorConfig& cfg, const FrameParams& p,
                             OpCounters* counters = nullptr) {
    const int dl = detail::peak_delay_cell(l_peak, p);
    const int dk = signed_doppler_index(k_peak - p.pilot_k, p.n);
    const double nu_c = dk * p.delta_f / p.n;

    detail::SupportWindow w;  // single Doppler column at k_peak, support delay rows
    if (cfg.truncated_support) {
        const int mt = p.m_tau();
        for (int d = 0; d < mt; ++d) w.delay_rows.push_back((p.pilot_l + d) % p.m);
    } else {
        for (int l = 0; l < p.m; ++l) w.delay_rows.push_back(l);
    }
    w.doppler_cols = {k_peak};
    w.build_flat(p);

    std::vector<cplx> a;
    double best = -1, best_tau = 0;
    for (const double tau_raw : refined_grid_tau(dl, cfg.m_tau, p)) {
        const double tau = detail::clamp_tau(tau_raw, p);
        detail::window_column(tau, nu_c, p, w, a);
        cplx ip(0, 0);
        for (size_t i = 0; i < w.flat.size(); ++i)
            ip += std::conj(a[i]) * residual.data[w.flat[i]];
        const double v = std::norm(ip);
        if (counters) {
            ++counters->delay_hypotheses;
            counters->delay_elems += static_cast<long long>(w.size());
        }
        if (v > best) {
            best = v;
            best_tau = tau;
        }
    }
    return best_tau;
}

/// TSE Doppler step: with the delay fixed, maximize |b_{l''}(tau_hat, nu)^H c_{l''}|^2
/// over the 1-D refined Doppler grid, where c_{l''} is the peak row of the residual.
inline double tse_doppler_step(const DdVector& residual, int l_peak, int k_peak, double tau_hat,
                               const EstimatorConfig& cfg, const FrameParams& p,
                               OpCounters* counters = nullptr) {
    const int dk = signed_doppler_index(k_peak - p.pilot_k, p.n);

    detail::SupportWindow w;  // single delay row at l_peak, support Doppler columns
    w.delay_rows = {l_peak};
    if (cfg.truncated_support) {
        const int nv = p.n_nu();
        for (int d = -(nv / 2); d <= nv / 2; ++d)
            w.doppler_cols.push_back(((p.pilot_k + d) % p.n + p.n) % p.n);
    } else {
        for (int k = 0; k < p.n; ++k) w.doppler_cols.push_back(k);
    }
    w.build_flat(p);

    std::vector<cplx> b;
    double best = -1, best_nu = 0;
    for (const double nu : refined_grid_nu(dk, cfg.n_nu, p)) {
        detail::window_column(tau_hat, nu, p, w, b);
        cplx ip(0, 0);
        for (size_t i = 0; i < w.flat.size(); ++i)
            ip += std::conj(b[i]) * residual.data[w.flat[i]];
        const double v = std::norm(ip);
        if (counters) {
            ++counters->doppler_hypotheses;
            counters->doppler_elems += static_cast<long long>(w.size());
        }
        if (v > best) {
            best = v;
            best_nu = nu;
        }
    }
    return best_nu;
}

/// Two-step estimator: per iteration, peak find, 1-D delay search on the peak
/// column, 1-D Doppler search on the peak row, full-vector gain fit, cancel.
inline PathEstimates tse_estimate(const DdVector& x_p_hat, const EstimatorConfig& cfg,
                                  const FrameParams& p) {
    cfg.validate();
    detail::IterationState st(x_p_hat, p, cfg);
    int t = 1;
    while (true) {
        const int q = detail::argmax_energy(st.residual.data);
        if (!st.support_flags[q]) ++st.out.peaks_outside_support;
        const auto [l, k] = unflatten(q, p);

        const double tau_hat = tse_delay_step(st.residual, k, l, cfg, p, &st.out.counters);
        const double nu_hat = tse_doppler_step(st.residual, l, k, tau_hat, cfg, p, &st.out.counters);

        const cplx hhat = gain_estimate(tau_hat, nu_hat, st.residual, p);
        st.record(hhat, tau_hat, nu_hat);
        st.cancel(hhat, tau_hat, nu_hat, p);
        ++t;
        ++st.out.iterations_run;
        if (st.done(t, cfg, st.out)) break;
    }
    st.out.residual_energies = st.energies;
    return st.out;
}

/// Impulse-pilot baseline: read per-DDRE gains over the support region, keep
/// entries above threshold_sigma times the DD noise standard deviation, and emit
/// one integer-grid pseudo-path per kept tap (undoing the phase prefactor).
inline PathEstimates impulse_baseline(const DdVector& x_p_hat, const FrameParams& p,
                                      double threshold_sigma, double n0 = 1.0) {
    PathEstimates out;
    const double s_ep = std::sqrt(static_cast<double>(p.m) * p.n * p.pilot_energy);
    const double sigma = std::sqrt(static_cast<double>(p.m) * p.n * n0) / s_ep;
    const int mt = p.m_tau(), nv = p.n_nu();
    const double e0 = x_p_hat.energy() / (s_ep * s_ep);
    for (int dk = -(nv / 2); dk <= nv / 2; ++dk) {
        const int k = ((p.pilot_k + dk) % p.n + p.n) % p.n;
        for (int dl = 0; dl < mt; ++dl) {
            const int l = (p.pilot_l + dl) % p.m;
            const cplx g = x_p_hat.data[k * p.m + l] / s_ep;
            if (std::abs(g) <= threshold_sigma * sigma) continue;
            const double tau = dl / (p.m * p.delta_f);
            const double nu = dk * p.delta_f / p.n;
            const double ph = 2.0 * pi * nu * tau;  // undo e^{-j2pi nu tau}
            out.gains.push_back(g * cplx(std::cos(ph), std::sin(ph)));
            out.taus.push_back(tau);
            out.nus.push_back(nu);
        }
    }
    out.iterations_run = 1;
    out.terminated_by = Termination::tolerance;
    out.residual_energies = {e0, 0.0};
    return out;
}

/// Exhaustive joint ML reference over an explicit hypothesis list, for L = 1 or 2
/// paths on small frames: maximizes x^H A (A^H A)^{-1} A^H x and solves the
/// normal equations for the gains. Coincident hypothesis pairs (singular Gram)
/// are skipped.
inline PathEstimates ml_reference(const DdVector& x_p_hat, const FrameParams& p, int n_paths,
                                  const std::vector<std::pair<double, double>>& grid) {
    if (n_paths < 1 || n_paths > 2)
        throw std::invalid_argument("ml_reference: only L = 1 or 2 supported");
    if (p.size() > 512) throw std::invalid_argument("ml_reference: frame too large (MN > 512)");
    if (grid.empty()) throw std::invalid_argument("ml_reference: empty hypothesis grid");

    const int mn = p.size();
    const size_t h = grid.size();
    std::vector<std::vector<cplx>> cols(h);
    std::vector<cplx> proj(h);   // a_i^H x
    std::vector<double> norm2(h);
    for (size_t i = 0; i < h; ++i) {
        cols[i] = a_column(grid[i].first, grid[i].second, p).a.data;
        cplx ip(0, 0);
        double n2 = 0;
        for (int r = 0; r < mn; ++r) {
            ip += std::conj(cols[i][r]) * x_p_hat.data[r];
            n2 += std::norm(cols[i][r]);
        }
        proj[i] = ip;
        norm2[i] = n2;
    }

    PathEstimates out;
    const double e0 =
        x_p_hat.energy() / (static_cast<double>(p.m) * p.n * p.pilot_energy);
    out.residual_energies.push_back(e0);

    if (n_paths == 1) {
        double best = -1;
        size_t bi = 0;
        for (size_t i = 0; i < h; ++i) {
            const double v = std::norm(proj[i]) / norm2[i];
            ++out.counters.hypothesis_evals;
            if (v > best) {
                best = v;
                bi = i;
            }
        }
        out.gains = {proj[bi] / norm2[bi]};
        out.taus = {grid[bi].first};
        out.nus = {grid[bi].second};
    } else {
        double best = -1;
        size_t bi = 0, bj = 0;
        cplx bg1, bg2;
        for (size_t i = 0; i < h; ++i) {
            for (size_t j = i; j < h; ++j) {
                cplx c(0, 0);
                for (int r = 0; r < mn; ++r) c += std::conj(cols[i][r]) * cols[j][r];
                const double det = norm2[i] * norm2[j] - std::norm(c);
                ++out.counters.hypothesis_evals;
                if (det <= 1e-9 * norm2[i] * norm2[j]) continue;  // coincident: skip
                const cplx y1 = proj[i], y2 = proj[j];
                const double v = (norm2[j] * std::norm(y1) + norm2[i] * std::norm(y2) -
                                  2.0 * std::real(c * std::conj(y1) * y2)) /
                                 det;
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                    bg1 = (norm2[j] * y1 - c * y2) / det;
                    bg2 = (norm2[i] * y2 - std::conj(c) * y1) / det;
                }
            }
        }
        if (best < 0) throw std::runtime_error("ml_reference: all hypothesis pairs singular");
        out.gains = {bg1, bg2};
        out.taus = {grid[bi].first, grid[bj].first};
        out.nus = {grid[bi].second, grid[bj].second};
    }

    DdVector res = x_p_hat;
    for (size_t i = 0; i < out.gains.size(); ++i) {
        const auto col = a_column(out.taus[i], out.nus[i], p);
        for (int r = 0; r < mn; ++r) res.data[r] -= out.gains[i] * col.a.data[r];
    }
    out.residual_energies.push_back(res.energy() /
                                    (static_cast<double>(p.m) * p.n * p.pilot_energy));
    out.iterations_run = 1;
    out.terminated_by = Termination::max_iterations;
    return out;
}

/// Reconstructed effective channel from estimated parameters; empty estimates
/// produce the zero matrix.
inline EffectiveChannelMatrix reconstruct_G(const PathEstimates& est, const FrameParams& p,
                                            const AssembleOptions& opt = {}) {
    if (est.gains.empty()) return EffectiveChannelMatrix::zero(p);
    auto g = assemble_G(est.to_channel(), p, opt);
    g.set_source(EffectiveChannelMatrix::Source::estimates);
    return g;
}

}  // namespace otfs
