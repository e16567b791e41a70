// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "otfs/frame.hpp"
#include "otfs/rng.hpp"

namespace otfs {

// ---------------------------------------------------------------------------
// Small DFT helpers: radix-2 in-place FFT with a direct-sum fallback for
// non-power-of-two lengths. Unnormalized in both directions.
// ---------------------------------------------------------------------------

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_inplace(std::vector<cplx>& x, bool inverse) {
    const size_t n = x.size();
    if (n <= 1) return;
    if (!is_pow2(n)) {
        std::vector<cplx> out(n, cplx(0, 0));
        const double sgn = inverse ? 1.0 : -1.0;
        for (size_t k = 0; k < n; ++k)
            for (size_t i = 0; i < n; ++i) {
                const double ph = sgn * 2.0 * pi * static_cast<double>(k * i % n) / n;
                out[k] += x[i] * cplx(std::cos(ph), std::sin(ph));
            }
        x = std::move(out);
        return;
    }
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1, 0);
            for (size_t j = 0; j < len / 2; ++j) {
                const cplx u = x[i + j];
                const cplx v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Grids and waveforms
// ---------------------------------------------------------------------------

/// M x N time-frequency grid, X[m,n] stored at n*M + m.
struct TfGrid {
    int m = 0, n = 0;
    std::vector<cplx> x;

    TfGrid() = default;
    TfGrid(int m_, int n_) : m(m_), n(n_), x(static_cast<size_t>(m_) * n_, cplx(0, 0)) {}

    cplx& at(int mi, int ni) { return x[static_cast<size_t>(ni) * m + mi]; }
    const cplx& at(int mi, int ni) const { return x[static_cast<size_t>(ni) * m + mi]; }
};

/// Complex baseband samples at rate Q*M*df with a cyclic prefix of cp_len
/// samples in front; the frame body is Q*M*N samples spanning N*T seconds.
struct SampledWaveform {
    std::vector<cplx> samples;  // [cp_len + Q*M*N]
    double rate = 0;            // [Hz]
    int cp_len = 0;
    int oversampling = 1;

    int body_len() const { return static_cast<int>(samples.size()) - cp_len; }
    cplx* body() { return samples.data() + cp_len; }
    const cplx* body() const { return samples.data() + cp_len; }

    double body_energy() const {  // integral |x(t)|^2 dt, Riemann
        double e = 0;
        for (int i = 0; i < body_len(); ++i) e += std::norm(body()[i]);
        return e / rate;
    }
};

/// ISFFT: X[m,n] = (1/MN) sum_{l,k} x[l,k] e^{-j2pi(ml/M - nk/N)}.
inline TfGrid isfft(const DdVector& x_dd, const FrameParams& p) {
    if (static_cast<int>(x_dd.data.size()) != p.size())
        throw std::invalid_argument("isfft: size mismatch");
    TfGrid out(p.m, p.n);
    // inverse DFT along Doppler (k -> n), then forward DFT along delay (l -> m)
    std::vector<cplx> tmp(static_cast<size_t>(p.m) * p.n);
    std::vector<cplx> buf;
    for (int l = 0; l < p.m; ++l) {
        buf.assign(p.n, cplx(0, 0));
        for (int k = 0; k < p.n; ++k) buf[k] = x_dd.data[k * p.m + l];
        fft_inplace(buf, true);
        for (int ni = 0; ni < p.n; ++ni) tmp[static_cast<size_t>(ni) * p.m + l] = buf[ni];
    }
    const double scale = 1.0 / p.size();
    for (int ni = 0; ni < p.n; ++ni) {
        buf.assign(tmp.begin() + static_cast<size_t>(ni) * p.m,
                   tmp.begin() + static_cast<size_t>(ni + 1) * p.m);
        fft_inplace(buf, false);
        for (int mi = 0; mi < p.m; ++mi) out.at(mi, ni) = scale * buf[mi];
    }
    return out;
}

/// SFFT: x[l',k'] = sum_{m,n} Y[m,n] e^{j2pi(m l'/M - n k'/N)}; inverse of isfft.
inline DdVector sfft(const TfGrid& y, const FrameParams& p) {
    if (y.m != p.m || y.n != p.n) throw std::invalid_argument("sfft: size mismatch");
    DdVector out(p);
    std::vector<cplx> tmp(static_cast<size_t>(p.m) * p.n);
    std::vector<cplx> buf;
    for (int ni = 0; ni < p.n; ++ni) {
        buf.assign(y.x.begin() + static_cast<size_t>(ni) * p.m,
                   y.x.begin() + static_cast<size_t>(ni + 1) * p.m);
        fft_inplace(buf, true);  // m -> l'
        for (int lp = 0; lp < p.m; ++lp) tmp[static_cast<size_t>(lp) * p.n + ni] = buf[lp];
    }
    for (int lp = 0; lp < p.m; ++lp) {
        buf.assign(tmp.begin() + static_cast<size_t>(lp) * p.n,
                   tmp.begin() + static_cast<size_t>(lp + 1) * p.n);
        fft_inplace(buf, false);  // n -> k'
        for (int kp = 0; kp < p.n; ++kp) out.data[kp * p.m + lp] = buf[kp];
    }
    return out;
}

/// Heisenberg transform with the unit-energy rectangular pulse g = 1/sqrt(T) on
/// [0, T), sampled at rate Q*M*df. Each slot is a zero-padded inverse DFT of its
/// TF row; a cyclic copy of the frame tail is prepended as CP.
inline SampledWaveform heisenberg_rect(const TfGrid& x, int q, const FrameParams& p) {
    if (q < 1) throw std::invalid_argument("heisenberg_rect: Q must be >= 1");
    if (x.m != p.m || x.n != p.n) throw std::invalid_argument("heisenberg_rect: size mismatch");
    SampledWaveform w;
    w.rate = static_cast<double>(q) * p.m * p.delta_f;
    w.oversampling = q;
    w.cp_len = static_cast<int>(std::ceil(p.tau_max * w.rate));
    const int slot = q * p.m;
    const int body = slot * p.n;
    w.samples.assign(static_cast<size_t>(w.cp_len) + body, cplx(0, 0));
    const double g0 = 1.0 / std::sqrt(p.T());
    std::vector<cplx> buf;
    for (int ni = 0; ni < p.n; ++ni) {
        buf.assign(slot, cplx(0, 0));
        for (int mi = 0; mi < p.m; ++mi) buf[mi] = x.at(mi, ni);
        fft_inplace(buf, true);
        for (int r = 0; r < slot; ++r) w.body()[ni * slot + r] = g0 * buf[r];
    }
    for (int i = 0; i < w.cp_len; ++i)
        w.samples[i] = w.body()[body - w.cp_len + i];
    return w;
}

struct NoiseSpec {
    double n0 = 0;           // one-sided PSD [W/Hz]; per-sample variance is n0 * rate
    std::uint64_t seed = 0;  // draws come from Rng(seed)
};

/// Apply the multipath LTV channel y(t) = sum_i h_i x(t - tau_i) e^{j2pi nu_i (t - tau_i)}
/// to one frame. Fractional delay is exact on the CP-circular body via a DFT
/// phase ramp; the Doppler factor multiplies pointwise at sample instants.
/// Optional complex AWGN of variance N0*rate per sample covers CP and body.
inline SampledWaveform apply_channel(const SampledWaveform& w, const ChannelState& ch,
                                     const std::optional<NoiseSpec>& noise = std::nullopt) {
    const int nb = w.body_len();
    for (const auto& path : ch.paths)
        if (std::ceil(path.tau * w.rate) > w.cp_len)
            throw std::invalid_argument("apply_channel: path delay exceeds the cyclic prefix");

    std::vector<cplx> spec(w.body(), w.body() + nb);
    fft_inplace(spec, false);

    SampledWaveform y;
    y.rate = w.rate;
    y.cp_len = w.cp_len;
    y.oversampling = w.oversampling;
    y.samples.assign(w.samples.size(), cplx(0, 0));

    std::vector<cplx> shifted(nb);
    for (const auto& path : ch.paths) {
        // circular fractional delay: multiply bin k by e^{-j2pi f_k tau}
        for (int k = 0; k < nb; ++k) {
            const double fk = (k <= nb / 2 ? k : k - nb) * w.rate / nb;
            const double ph = -2.0 * pi * fk * path.tau;
            shifted[k] = spec[k] * cplx(std::cos(ph), std::sin(ph));
        }
        fft_inplace(shifted, true);
        const double inv = 1.0 / nb;
        for (int i = 0; i < nb; ++i) {
            const double t = i / w.rate;
            const double ph = 2.0 * pi * path.nu * (t - path.tau);
            y.body()[i] += path.gain * shifted[i] * inv * cplx(std::cos(ph), std::sin(ph));
        }
    }
    for (int i = 0; i < y.cp_len; ++i) y.samples[i] = y.body()[nb - y.cp_len + i];

    if (noise && noise->n0 > 0) {
        Rng rng(noise->seed);
        const double s = std::sqrt(noise->n0 * w.rate);
        for (auto& v : y.samples) v += s * rng.cnormal();
    }
    return y;
}

/// Wigner transform with the rectangular receive pulse, as a Riemann sum at the
/// sampling rate: Ytilde[m,n] = (1/(sqrt(T) rate)) sum_r y[n*QM + r] e^{-j2pi m r/(QM)}.
/// The CP samples are discarded.
inline TfGrid wigner_rect(const SampledWaveform& y, const FrameParams& p) {
    const int q = y.oversampling;
    const int slot = q * p.m;
    if (y.body_len() != slot * p.n) throw std::invalid_argument("wigner_rect: size mismatch");
    TfGrid out(p.m, p.n);
    const double scale = 1.0 / (std::sqrt(p.T()) * y.rate);
    std::vector<cplx> buf(slot);
    for (int ni = 0; ni < p.n; ++ni) {
        buf.assign(y.body() + static_cast<size_t>(ni) * slot,
                   y.body() + static_cast<size_t>(ni + 1) * slot);
        fft_inplace(buf, false);
        for (int mi = 0; mi < p.m; ++mi) out.at(mi, ni) = scale * buf[mi];
    }
    return out;
}

/// Full sampled transmit/channel/receive chain; the independent reference the
/// closed-form channel is checked against.
inline DdVector oracle_end_to_end(const DdVector& x_dd, const ChannelState& ch,
                                  const FrameParams& p, int q,
                                  const std::optional<NoiseSpec>& noise = std::nullopt) {
    const TfGrid x_tf = isfft(x_dd, p);
    const SampledWaveform tx = heisenberg_rect(x_tf, q, p);
    const SampledWaveform rx = apply_channel(tx, ch, noise);
    return sfft(wigner_rect(rx, p), p);
}

}  // namespace otfs
