// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/estimators.hpp"
#include "otfs/frame.hpp"

namespace otfs {

/// E_p for a target pilot SNR: PSNR = E_p / (M N N0).
inline double psnr_to_pilot_energy(double psnr_db, const FrameParams& p, double n0) {
    if (n0 <= 0) throw std::invalid_argument("psnr_to_pilot_energy: N0 must be positive");
    return std::pow(10.0, psnr_db / 10.0) * p.m * p.n * n0;
}

/// Single-trial normalized channel-matrix error ||G - Ghat||_F^2 / ||G||_F^2.
inline double nmse(const EffectiveChannelMatrix& g, const EffectiveChannelMatrix& g_hat) {
    const double den = g.frob_norm2();
    if (den == 0) throw std::invalid_argument("nmse: reference matrix is zero");
    return g.frob_diff2(g_hat) / den;
}

/// Same quantity from path parameters through the closed-form column Gram sums,
/// without materializing either matrix: G - Ghat is the channel whose paths are
/// the true paths with gains h and the estimated paths with gains -hhat.
inline double nmse_from_paths(const ChannelState& truth, const PathEstimates& est,
                              const FrameParams& p) {
    std::vector<ChannelPath> diff = truth.paths;
    for (size_t i = 0; i < est.gains.size(); ++i)
        diff.push_back({-est.gains[i], est.taus[i], est.nus[i]});

    const size_t L = diff.size();
    std::vector<DelayTables> tables;
    tables.reserve(L);
    for (const auto& path : diff) tables.emplace_back(path.tau, path.nu, p);

    const size_t Lt = truth.paths.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < L; ++i) {
        for (size_t j = i; j < L; ++j) {
            const cplx g = path_cross_gram_tables(tables[i], tables[j], diff[i].tau, diff[i].nu,
                                                  diff[j].tau, diff[j].nu, p);
            const cplx term = std::conj(diff[i].gain) * diff[j].gain * g;
            const double c = (i == j) ? term.real() : 2.0 * term.real();
            num += c;
            if (i < Lt && j < Lt) den += c;
        }
    }
    if (den == 0) throw std::invalid_argument("nmse_from_paths: reference channel is zero");
    return num / den;
}

inline double to_db(double x) { return 10.0 * std::log10(std::max(x, 1e-300)); }

}  // namespace otfs
