// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace otfs {

using cplx = std::complex<double>;

constexpr double pi = 3.14159265358979323846;

/// OTFS numerology: an M x N delay-Doppler grid over a frame of duration
/// N*T and bandwidth M*delta_f, plus the pilot location and the channel
/// spread bounds everything downstream is sized from.
struct FrameParams {
    int m = 64;             // delay bins
    int n = 32;             // Doppler bins
    double delta_f = 30e3;  // subcarrier spacing [Hz]; T = 1/delta_f
    double pilot_energy = 1.0;  // E_p, energy of the transmitted TD pilot [J]
    int pilot_l = 0;
    int pilot_k = 0;
    double tau_max = 0.0;  // maximum path delay [s], < T
    double nu_max = 0.0;   // maximum |Doppler| [Hz]

    double T() const { return 1.0 / delta_f; }
    int size() const { return m * n; }

    // Delay-domain extent of the pilot support region, M_tau = ceil(M df tau_max) + 1.
    int m_tau() const { return static_cast<int>(std::ceil(m * delta_f * tau_max)) + 1; }
    // Doppler-domain extent, N_nu = 2 ceil(nu_max N T) + 1.
    int n_nu() const { return 2 * static_cast<int>(std::ceil(nu_max * n * T())) + 1; }

    double delay_resolution() const { return T() / m; }
    double doppler_resolution() const { return delta_f / n; }

    void validate() const {
        if (m < 1 || n < 1) throw std::invalid_argument("FrameParams: M, N must be positive");
        if (delta_f <= 0) throw std::invalid_argument("FrameParams: delta_f must be positive");
        if (pilot_l < 0 || pilot_l >= m || pilot_k < 0 || pilot_k >= n)
            throw std::invalid_argument("FrameParams: pilot location out of range");
        if (tau_max < 0 || tau_max >= T())
            throw std::invalid_argument("FrameParams: tau_max must lie in [0, T)");
        if (nu_max < 0) throw std::invalid_argument("FrameParams: nu_max must be nonnegative");
        if (m_tau() > m || n_nu() > n)
            throw std::invalid_argument("FrameParams: spread bounds exceed the grid");
        if (pilot_energy <= 0) throw std::invalid_argument("FrameParams: E_p must be positive");
    }
};

/// Flat index of DDRE (l, k) in the vectorized frame: k*M + l, 0-based.
inline int flat_index(int l, int k, const FrameParams& p) {
    if (l < 0 || l >= p.m || k < 0 || k >= p.n)
        throw std::out_of_range("flat_index: DDRE index out of range");
    return k * p.m + l;
}

struct DdIndex {
    int l;
    int k;
};

inline DdIndex unflatten(int flat, const FrameParams& p) {
    if (flat < 0 || flat >= p.size()) throw std::out_of_range("unflatten: index out of range");
    return {flat % p.m, flat / p.m};
}

/// Centered wrap of a Doppler index difference into [-floor(N/2), ceil(N/2)).
inline int signed_doppler_index(int k, int n) {
    int w = ((k % n) + n) % n;
    if (w >= (n + 1) / 2) w -= n;
    return w;
}

/// One propagation path: complex gain, delay, Doppler shift.
struct ChannelPath {
    cplx gain;
    double tau = 0.0;  // [s]
    double nu = 0.0;   // [Hz]

    // Integer/fractional decomposition w.r.t. a frame's resolution:
    // tau = (l_tau + iota) / (M df), nu = (k_nu + kappa) / (N T).
    int delay_index(const FrameParams& p) const {
        return static_cast<int>(std::lround(tau * p.m * p.delta_f));
    }
    double delay_fraction(const FrameParams& p) const {
        return tau * p.m * p.delta_f - delay_index(p);
    }
    int doppler_index(const FrameParams& p) const {
        return static_cast<int>(std::lround(nu * p.n * p.T()));
    }
    double doppler_fraction(const FrameParams& p) const {
        return nu * p.n * p.T() - doppler_index(p);
    }
};

/// Ground-truth (or reconstructed) parametric channel.
struct ChannelState {
    std::vector<ChannelPath> paths;
    bool normalized = false;

    double gain_power() const {
        double s = 0;
        for (const auto& p : paths) s += std::norm(p.gain);
        return s;
    }

    void validate(const FrameParams& fp) const {
        if (paths.empty()) throw std::invalid_argument("ChannelState: needs at least one path");
        for (const auto& p : paths) {
            if (p.tau < 0 || p.tau > fp.tau_max)
                throw std::invalid_argument("ChannelState: path delay outside [0, tau_max]");
            if (std::abs(p.nu) > fp.nu_max)
                throw std::invalid_argument("ChannelState: path Doppler exceeds nu_max");
        }
        if (normalized && std::abs(gain_power() - 1.0) > 1e-12)
            throw std::invalid_argument("ChannelState: normalized flag set but sum |h|^2 != 1");
    }
};

/// Length-MN complex vector in the k*M + l flat ordering.
struct DdVector {
    std::vector<cplx> data;

    DdVector() = default;
    explicit DdVector(const FrameParams& p) : data(p.size(), cplx(0, 0)) {}

    cplx& at(int l, int k, const FrameParams& p) { return data[flat_index(l, k, p)]; }
    const cplx& at(int l, int k, const FrameParams& p) const { return data[flat_index(l, k, p)]; }

    double energy() const {
        double e = 0;
        for (const auto& v : data) e += std::norm(v);
        return e;
    }
};

/// Sub-DDRE hypothesis lattice refinement factors.
struct RefinedGrid {
    int m_tau = 6;
    int n_nu = 6;

    int delay_points() const { return 2 * (m_tau / 2) + 1; }
    int doppler_points() const { return 2 * (n_nu / 2) + 1; }
};

/// Delay hypotheses around cell l: l*T/M + gamma*T/(m_tau*M), clamped into [0, T).
inline std::vector<double> refined_grid_tau(int l, int m_tau, const FrameParams& p) {
    if (m_tau < 1) throw std::invalid_argument("refined_grid_tau: refinement must be >= 1");
    const int half = m_tau / 2;
    const double cell = p.T() / p.m;
    std::vector<double> out;
    out.reserve(2 * half + 1);
    for (int g = -half; g <= half; ++g) {
        double tau = l * cell + g * cell / m_tau;
        if (tau < 0) tau = 0;
        if (tau >= p.T()) tau = std::nextafter(p.T(), 0.0);
        out.push_back(tau);
    }
    return out;
}

/// Doppler hypotheses around (signed) cell k: k*df/N + chi*df/(n_nu*N). Signed, never wrapped.
inline std::vector<double> refined_grid_nu(int k, int n_nu, const FrameParams& p) {
    if (n_nu < 1) throw std::invalid_argument("refined_grid_nu: refinement must be >= 1");
    const int half = n_nu / 2;
    const double cell = p.delta_f / p.n;
    std::vector<double> out;
    out.reserve(2 * half + 1);
    for (int c = -half; c <= half; ++c) out.push_back(k * cell + c * cell / n_nu);
    return out;
}

/// 2-D refined lattice for cell (l, k): Cartesian product of the 1-D grids,
/// enumerated Doppler-major so the lowest-index point is the (-gamma,-chi) corner.
inline std::vector<std::pair<double, double>> refined_grid_2d(int l, int k, const RefinedGrid& g,
                                                              const FrameParams& p) {
    auto taus = refined_grid_tau(l, g.m_tau, p);
    auto nus = refined_grid_nu(k, g.n_nu, p);
    std::vector<std::pair<double, double>> out;
    out.reserve(taus.size() * nus.size());
    for (double nu : nus)
        for (double tau : taus) out.emplace_back(tau, nu);
    return out;
}

/// The M_tau x N_nu DDRE index set where the received pilot energy concentrates:
/// delay offsets 0..M_tau-1 from l_p (mod M), Doppler offsets -floor(N_nu/2)..floor(N_nu/2)
/// from k_p (mod N). Flat indices, enumerated Doppler-major.
inline std::vector<int> support_region(const FrameParams& p) {
    const int mt = p.m_tau(), nv = p.n_nu();
    std::vector<int> out;
    out.reserve(static_cast<size_t>(mt) * nv);
    for (int dk = -(nv / 2); dk <= nv / 2; ++dk) {
        const int k = ((p.pilot_k + dk) % p.n + p.n) % p.n;
        for (int dl = 0; dl < mt; ++dl) {
            const int l = (p.pilot_l + dl) % p.m;
            out.push_back(k * p.m + l);
        }
    }
    return out;
}

}  // namespace otfs
