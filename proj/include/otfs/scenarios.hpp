// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "otfs/frame.hpp"
#include "otfs/rng.hpp"

namespace otfs {

/// Aircraft-arrival channel: a fixed-power LOS ray at maximum Doppler plus
/// Rayleigh-faded scattered rays with an exponential power-delay profile.
struct AircraftScenarioConfig {
    int paths = 5;
    double rice_k_db = 15.0;
    double tau_slope = 1e-6;  // [s]
    double tau_max = 7e-6;    // [s]
    double nu_max = 1700.0;   // [Hz]
    std::uint64_t seed = 0;

    void validate() const {
        if (paths < 1) throw std::invalid_argument("AircraftScenarioConfig: paths >= 1");
        if (tau_slope <= 0) throw std::invalid_argument("AircraftScenarioConfig: tau_slope > 0");
    }
};

/// Draw one channel realization. Path 1 is LOS: tau = 0, nu = nu_max,
/// |h1|^2 = K/(K+1) with uniform phase. Paths 2..P: tau ~ U(0, tau_max],
/// nu = nu_max cos(theta), gains complex Gaussian with mean-square weights
/// proportional to exp(-tau/tau_slope), scaled so the scattered weights sum to
/// 1/(K+1); the emitted draw is then normalized to sum |h_i|^2 = 1 exactly.
inline ChannelState aircraft_channel(const AircraftScenarioConfig& cfg, const FrameParams& fp,
                                     Rng& rng) {
    cfg.validate();
    if (cfg.tau_max >= fp.T())
        throw std::invalid_argument("aircraft_channel: tau_max must be below T");
    const double k_lin = std::pow(10.0, cfg.rice_k_db / 10.0);

    ChannelState ch;
    ch.paths.reserve(cfg.paths);
    const double ph = 2.0 * pi * rng.uniform();
    ch.paths.push_back(
        {std::sqrt(k_lin / (k_lin + 1.0)) * cplx(std::cos(ph), std::sin(ph)), 0.0, cfg.nu_max});

    const int ns = cfg.paths - 1;
    if (ns > 0) {
        std::vector<double> taus(ns), weights(ns);
        double wsum = 0;
        for (int i = 0; i < ns; ++i) {
            taus[i] = rng.uniform() * cfg.tau_max;  // uniform on (0, tau_max]
            weights[i] = std::exp(-taus[i] / cfg.tau_slope);
            wsum += weights[i];
        }
        for (int i = 0; i < ns; ++i) {
            const double theta = 2.0 * pi * rng.uniform();
            const double msq = weights[i] / wsum / (k_lin + 1.0);
            const cplx g = std::sqrt(msq) * rng.cnormal();
            ch.paths.push_back({g, taus[i], cfg.nu_max * std::cos(theta)});
        }
    }

    const double scale = 1.0 / std::sqrt(ch.gain_power());
    for (auto& path : ch.paths) path.gain *= scale;
    ch.normalized = true;
    return ch;
}

enum class TwoPathResolution { coarse, fine };

/// Fixed two-path channel viewed at coarse (M = N = 16) or fine (M = N = 64)
/// resolution with the same physics: separations straddle one DDRE at the
/// coarse grid and exceed it at the fine grid.
inline std::pair<FrameParams, ChannelState> two_path_demo(TwoPathResolution res,
                                                          double pilot_energy = 1.0) {
    FrameParams p;
    p.m = p.n = (res == TwoPathResolution::coarse) ? 16 : 64;
    p.delta_f = 30e3;
    p.pilot_l = p.m / 2;
    p.pilot_k = p.n / 2;
    p.tau_max = 7e-6;
    p.nu_max = 1700.0;
    p.pilot_energy = pilot_energy;
    p.validate();

    ChannelState ch;
    const cplx h1(0.78, 0.0);
    const cplx h2 = 0.62 * cplx(std::cos(0.8), std::sin(0.8));
    ch.paths.push_back({h1, 1.2e-6, 700.0});
    ch.paths.push_back({h2, 2.5e-6, -500.0});
    const double scale = 1.0 / std::sqrt(ch.gain_power());
    for (auto& path : ch.paths) path.gain *= scale;
    ch.normalized = true;
    ch.validate(p);
    return {p, ch};
}

/// Single fractional path for the row/column energy-localization picture; the
/// peak lands near (floor(l_p + tau' M df), floor(k_p + nu' N T)).
inline ChannelState single_path_demo(const FrameParams& p) {
    ChannelState ch;
    const double tau = 1.45 / (p.m * p.delta_f);
    const double nu = 2.41 / (p.n * p.T());
    if (tau > p.tau_max || nu > p.nu_max)
        throw std::invalid_argument("single_path_demo: frame spread bounds too small");
    ch.paths.push_back({cplx(1.0, 0.0), tau, nu});
    ch.normalized = true;
    return ch;
}

inline FrameParams single_path_demo_frame(double pilot_energy = 1.0) {
    FrameParams p;
    p.m = 64;
    p.n = 32;
    p.delta_f = 30e3;
    p.pilot_l = 32;
    p.pilot_k = 16;
    p.tau_max = 7e-6;
    p.nu_max = 2400.0;
    p.pilot_energy = pilot_energy;
    p.validate();
    return p;
}

}  // namespace otfs
