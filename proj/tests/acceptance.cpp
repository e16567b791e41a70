// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails. Thresholds are fixed here, not tuned at run time.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "otfs/estimators.hpp"
#include "otfs/metrics.hpp"
#include "otfs/scenarios.hpp"
#include "otfs/sweep.hpp"
#include "otfs/waveform.hpp"

using namespace otfs;

namespace {

int g_failures = 0;

void report(int idx, const char* what, bool ok, const std::string& detail) {
    std::printf("%s  criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, what, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

FrameParams frame_16x8(double psnr_db = 30.0) {
    FrameParams p;
    p.m = 16;
    p.n = 8;
    p.delta_f = 30e3;
    p.pilot_l = 8;
    p.pilot_k = 4;
    p.tau_max = 7e-6;
    p.nu_max = 1700.0;
    p.pilot_energy = psnr_to_pilot_energy(psnr_db, p, 1.0);
    return p;
}

FrameParams frame_64x32(double psnr_db) {
    FrameParams p;
    p.m = 64;
    p.n = 32;
    p.delta_f = 30e3;
    p.pilot_l = 32;
    p.pilot_k = 16;
    p.tau_max = 7e-6;
    p.nu_max = 1700.0;
    p.pilot_energy = psnr_to_pilot_energy(psnr_db, p, 1.0);
    return p;
}

ChannelState random_fractional_channel(const FrameParams& p, int n_paths, Rng& rng) {
    ChannelState ch;
    std::vector<double> mags(n_paths);
    double total = 0;
    for (int i = 0; i < n_paths; ++i) {
        mags[i] = 0.3 + 0.7 * rng.uniform();
        total += mags[i] * mags[i];
    }
    for (int i = 0; i < n_paths; ++i) {
        const double ph = 2 * pi * rng.uniform();
        ch.paths.push_back({mags[i] / std::sqrt(total) * cplx(std::cos(ph), std::sin(ph)),
                            rng.uniform() * p.tau_max, (2 * rng.uniform() - 1) * p.nu_max});
    }
    ch.normalized = true;
    return ch;
}

// --------------------------------------------------------------------------
// 1. closed-form vs oracle
// --------------------------------------------------------------------------
void criterion_1() {
    const FrameParams p = frame_16x8();
    bool ok = true;
    double worst32 = 0, worst_seed_time = 0;
    for (int seed = 0; seed < 10; ++seed) {
        const double t0 = now_s();
        Rng rng(trial_seed(101, seed));
        const ChannelState ch = random_fractional_channel(p, 3, rng);
        DdVector x(p);
        const double s = std::sqrt(0.5);
        for (auto& v : x.data) v = cplx(rng.raw() % 2 ? s : -s, rng.raw() % 2 ? s : -s);
        const auto rep = run_oracle_validation(p, {8, 16, 32}, ch, x);
        if (!rep.monotone) ok = false;
        const double m32 = rep.rows.back().rel_mismatch;
        worst32 = std::max(worst32, m32);
        if (m32 > 0.01) ok = false;
        worst_seed_time = std::max(worst_seed_time, now_s() - t0);
    }
    if (worst_seed_time > 60.0) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "worst Q=32 mismatch %.3e, monotone in Q, max %.2f s/seed", worst32,
                  worst_seed_time);
    report(1, "closed-form channel matches the sampled-waveform oracle", ok, buf);
}

// --------------------------------------------------------------------------
// 2. kernel identities
// --------------------------------------------------------------------------
void criterion_2() {
    bool ok = true;
    double worst_d = 0;
    for (int n = 1; n <= 256; n = n < 8 ? n + 1 : n * 2) {
        for (int i = 0; i <= 800; ++i) {
            const double x = -2.0 + i * 0.005;
            worst_d = std::max(worst_d, std::abs(doppler_kernel(x, n) - doppler_kernel_sum(x, n)));
        }
        for (double x : {0.0, 1.0, -1.0, 2.0, -2.0, 1e-11, 1 - 1e-11})
            worst_d = std::max(worst_d, std::abs(doppler_kernel(x, n) - doppler_kernel_sum(x, n)));
    }
    if (worst_d > 1e-12) ok = false;

    double worst_f = 0;
    for (int m : {4, 8, 16}) {
        FrameParams p;
        p.m = m;
        p.n = 8;
        p.delta_f = 30e3;
        p.tau_max = 7e-6;
        p.nu_max = 1700.0;
        Rng rng(202);
        for (int trial = 0; trial < 4; ++trial) {
            const double tau = rng.uniform() * p.tau_max;
            const double nu = (2 * rng.uniform() - 1) * p.nu_max;
            DelayTables t(tau, nu, p);
            for (int k = 0; k < p.n; ++k)
                for (int lp = 0; lp < p.m; ++lp)
                    for (int mm = 0; mm < p.m; ++mm)
                        worst_f = std::max(worst_f, std::abs(t.f(k, lp, mm, p) -
                                                             f_kernel(tau, nu, k, lp, mm, p)));
        }
    }
    if (worst_f > 1e-12) ok = false;

    double worst_c = 0;
    for (int n : {4, 8, 16}) {
        FrameParams p;
        p.m = 8;
        p.n = n;
        p.delta_f = 30e3;
        p.pilot_l = 4;
        p.pilot_k = n / 2;
        p.tau_max = 7e-6;
        p.nu_max = 0.1 * p.delta_f;
        Rng rng(300 + n);
        for (int i = 0; i < 20; ++i) {
            const double t1 = rng.uniform() * p.tau_max;
            const double t2 = rng.uniform() * p.tau_max;
            const double v1 = (2 * rng.uniform() - 1) * p.nu_max;
            const double v2 = (2 * rng.uniform() - 1) * p.nu_max;
            const double direct = column_coherence(t1, v1, t2, v2, p);
            const double closed = closed_form_coherence(t1, v1, t2, v2, p);
            worst_c = std::max(worst_c, std::abs(direct - closed) / std::max(direct, 1e-12));
        }
    }
    if (worst_c > 1e-10) ok = false;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "Dirichlet |closed-sum| %.1e (<=1e-12), f tables %.1e (<=1e-12), "
                  "coherence factorization %.1e rel (<=1e-10)",
                  worst_d, worst_f, worst_c);
    report(2, "kernel identities against brute-force oracles", ok, buf);
}

// --------------------------------------------------------------------------
// 3. energy properties
// --------------------------------------------------------------------------
void criterion_3() {
    const FrameParams p = frame_16x8();
    const double mnep = static_cast<double>(p.m) * p.n * p.pilot_energy;

    double worst_a = 0;
    Rng rng(404);
    for (int i = 0; i < 10; ++i) {
        const double tau = rng.uniform() * p.tau_max;
        const double nu = (2 * rng.uniform() - 1) * p.nu_max;
        worst_a = std::max(worst_a, std::abs(a_column(tau, nu, p).a.energy() - mnep) / mnep);
    }
    const bool ok_a = worst_a <= 1e-6;

    double worst_b = 0;
    for (int i = 0; i < 10; ++i) {
        const double tau = rng.uniform() * p.tau_max;
        const double nu = (2 * rng.uniform() - 1) * p.nu_max;
        const double e = path_response(tau, nu, p.pilot_l, p.pilot_k, p).energy();
        worst_b = std::max(worst_b, std::abs(e - 1.0));
    }
    const bool ok_b = worst_b <= 1e-6;

    // DD-domain noise variance through the sampled chain
    const double n0 = 0.8;
    double acc = 0;
    int count = 0;
    const TfGrid silence = isfft(DdVector(p), p);
    for (int trial = 0; trial < 90 && count < 12000; ++trial) {
        NoiseSpec noise{n0, trial_seed(505, trial)};
        ChannelState ident;
        ident.paths.push_back({cplx(1, 0), 0.0, 0.0});
        const auto y = apply_channel(heisenberg_rect(silence, 8, p), ident, noise);
        const DdVector out = sfft(wigner_rect(y, p), p);
        for (const auto& v : out.data) acc += std::norm(v);
        count += p.size();
    }
    const double var = acc / count;
    const double want = p.size() * n0;
    const bool ok_c = std::abs(var - want) / want <= 0.05 && count >= 10000;

    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "|a|^2 vs MN E_p worst rel dev %.3e (required 1e-6: %s); "
                  "single-path energy worst dev %.3e (required 1e-6: %s); "
                  "DD noise var %.4g vs MN N0 %.4g over %d samples (5%%: %s)",
                  worst_a, ok_a ? "ok" : "violated", worst_b, ok_b ? "ok" : "violated", var,
                  want, count, ok_c ? "ok" : "violated");
    report(3, "energy properties at the stated tolerances", ok_a && ok_b && ok_c, buf);
}

// --------------------------------------------------------------------------
// 4. asymptotic orthogonality trend
// --------------------------------------------------------------------------
void criterion_4() {
    const double df = 30e3;
    bool ok = true;
    double worst_drop = 1e9;
    Rng rng(606);
    for (int i = 0; i < 6; ++i) {
        const double dvt = 0.01 + 0.09 * rng.uniform();  // |v1 - v2| T <= 0.1
        const double v1 = (2 * rng.uniform() - 1) * 0.02 * df;
        const double v2 = v1 + dvt * df;
        const double t1 = rng.uniform() * 6e-6, t2 = rng.uniform() * 6e-6;
        double c8 = 0, c64 = 0;
        for (int n : {8, 64}) {
            FrameParams p;
            p.m = 8;
            p.n = n;
            p.delta_f = df;
            p.pilot_l = 4;
            p.pilot_k = n / 2;
            p.tau_max = 7e-6;
            p.nu_max = 0.2 * df;
            const double c = column_coherence(t1, v1, t2, v2, p);
            (n == 8 ? c8 : c64) = c;
        }
        const double drop_db = 20.0 * std::log10(c8 / c64);
        worst_drop = std::min(worst_drop, drop_db);
        if (drop_db < 6.0) ok = false;
    }

    double worst_coh = 0;
    for (int n : {32, 64, 128, 256}) {
        FrameParams p;
        p.m = 8;
        p.n = n;
        p.delta_f = df;
        p.pilot_l = 4;
        p.pilot_k = n / 2;
        p.tau_max = 7e-6;
        p.nu_max = 0.55 * df;
        for (int i = 0; i < 8; ++i) {
            // alias-free separations: 10/N <= |dv| T <= 0.5
            const double lo = 10.0 / n;
            if (lo > 0.5) continue;
            const double dvt = lo + (0.5 - lo) * rng.uniform();
            const double v1 = (2 * rng.uniform() - 1) * 0.02 * df;
            const double v2 = v1 + dvt * df;
            const double c = column_coherence(rng.uniform() * 6e-6, v1,
                                              rng.uniform() * 6e-6, v2, p);
            worst_coh = std::max(worst_coh, c);
            if (c > 0.1) ok = false;
        }
    }

    char buf[160];
    std::snprintf(buf, sizeof buf, "min N8->N64 drop %.1f dB (>=6), worst coherence %.3f at N|dv|T>=10 (<=0.1)",
                  worst_drop, worst_coh);
    report(4, "columns decohere with Doppler resolution", ok, buf);
}

// --------------------------------------------------------------------------
// 5. estimator recovery
// --------------------------------------------------------------------------
void criterion_5() {
    const double t0 = now_s();
    const FrameParams p = frame_64x32(40.0);
    AircraftScenarioConfig scen;   // P=5, K=15 dB, tau 7us, nu 1700 Hz
    EstimatorConfig cfg;           // m_tau = n_nu = 6, T_max = 15
    cfg.epsilon = 1e-6;            // the criterion pins T_max, not epsilon
    cfg.truncated_support = false; // full-length objective, the accuracy-first mode
    const double dt = p.T() / (cfg.m_tau * p.m);
    const double dv = p.delta_f / (cfg.n_nu * p.n);

    auto hit = [&](const ChannelState& truth, const PathEstimates& est, double scale) {
        for (const auto& path : truth.paths) {
            bool found = false;
            for (size_t i = 0; i < est.size(); ++i) {
                if (std::abs(est.taus[i] - path.tau) <= scale * dt * 1.000001 &&
                    std::abs(est.nus[i] - path.nu) <= scale * dv * 1.000001) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    };

    int ok_m = 0, ok_t = 0, ok_m3 = 0, ok_t3 = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(trial_seed(707, trial));
        const ChannelState ch = aircraft_channel(scen, p, rng);
        DdVector x(p);
        for (const auto& path : ch.paths) {
            const auto col = a_column(path.tau, path.nu, p);
            for (int i = 0; i < p.size(); ++i) x.data[i] += path.gain * col.a.data[i];
        }
        const double s = std::sqrt(static_cast<double>(p.m) * p.n);
        for (auto& v : x.data) v += s * rng.cnormal();

        const auto em = mmle_estimate(x, cfg, p);
        const auto et = tse_estimate(x, cfg, p);
        ok_m += hit(ch, em, 1.0);
        ok_t += hit(ch, et, 1.0);
        ok_m3 += hit(ch, em, 3.0);
        ok_t3 += hit(ch, et, 3.0);
    }
    const double elapsed = now_s() - t0;
    const bool ok = ok_m >= 95 && ok_t >= 95 && elapsed <= 600.0;
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "within one refined step: M-MLE %d/100, TSE %d/100 (>=95 required; "
                  "within half a DDRE: %d and %d), %.0f s",
                  ok_m, ok_t, ok_m3, ok_t3, elapsed);
    report(5, "every true path recovered within one refined-grid step", ok, buf);
}

// --------------------------------------------------------------------------
// 6. ordinal NMSE reproduction
// --------------------------------------------------------------------------
struct Curve {
    std::vector<double> axis;
    std::vector<double> mmle, tse, impulse;
};

Curve run_curve(SweepAxis axis, const std::vector<double>& values, double psnr_db, int t_max,
                int trials) {
    SweepConfig cfg;
    cfg.frame = frame_64x32(psnr_db);
    cfg.frame.pilot_energy = 1.0;
    cfg.scenario = AircraftScenarioConfig{};
    cfg.estimators = {"mmle", "tse", "impulse"};
    cfg.psnr_db = psnr_db;
    cfg.axis = axis;
    cfg.axis_values = values;
    cfg.trials = trials;
    cfg.base_seed = 808;
    cfg.estimator.t_max = t_max;
    cfg.estimator.epsilon = 1e-5;             // measured near-optimal at PSNR 20
    cfg.estimator.truncated_support = false;  // accuracy-first objective mode
    cfg.record_wall_time = false;
    const auto recs = run_sweep(cfg);
    Curve c;
    c.axis = values;
    for (const auto& r : recs) {
        if (r.estimator == "mmle") c.mmle.push_back(r.nmse_db);
        if (r.estimator == "tse") c.tse.push_back(r.nmse_db);
        if (r.estimator == "impulse") c.impulse.push_back(r.nmse_db);
    }
    return c;
}

bool non_increasing(const std::vector<double>& v, double slack_db = 0.0) {
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + slack_db) return false;
    return true;
}

void print_curve(const char* name, const Curve& c) {
    std::printf("      %-8s axis:", name);
    for (double v : c.axis) std::printf(" %8.3g", v);
    std::printf("\n      %-8s mmle:", name);
    for (double v : c.mmle) std::printf(" %8.2f", v);
    std::printf("\n      %-8s tse :", name);
    for (double v : c.tse) std::printf(" %8.2f", v);
    if (!c.impulse.empty()) {
        std::printf("\n      %-8s imp :", name);
        for (double v : c.impulse) std::printf(" %8.2f", v);
    }
    std::printf("\n");
}

void criterion_6() {
    const double t0 = now_s();
    const int trials = 200;
    std::string detail;
    bool ok = true;
    char buf[300];

    // (a) + (b): NMSE vs PSNR
    const Curve psnr = run_curve(SweepAxis::psnr, {0, 5, 10, 15, 20, 25, 30}, 20.0, 15, trials);
    const bool a_ok =
        non_increasing(psnr.mmle) && non_increasing(psnr.tse) && non_increasing(psnr.impulse);
    ok &= a_ok;
    bool b_ok = true;
    for (size_t i = 2; i < psnr.axis.size(); ++i) {  // PSNR >= 10
        if (psnr.mmle[i] >= psnr.impulse[i] || psnr.tse[i] >= psnr.impulse[i]) b_ok = false;
    }
    ok &= b_ok;
    std::snprintf(buf, sizeof buf, "(a) monotone in PSNR %s; (b) below impulse at PSNR>=10 %s; ",
                  a_ok ? "yes" : "NO", b_ok ? "yes" : "NO");
    detail += buf;

    // (c) n_nu sweep at PSNR 20: large gain to 4, under 1 dB further gain to 8
    const Curve nnu = run_curve(SweepAxis::n_nu, {1, 2, 4, 8}, 20.0, 15, trials);
    const double c14m = nnu.mmle[0] - nnu.mmle[2];
    const double c48m = nnu.mmle[2] - nnu.mmle[3];
    const double c14t = nnu.tse[0] - nnu.tse[2];
    const double c48t = nnu.tse[2] - nnu.tse[3];
    const bool c_ok = c14m > 1.0 && c14t > 1.0 && c48m < 1.0 && c48t < 1.0;
    ok &= c_ok;
    std::snprintf(buf, sizeof buf, "(c) n_nu gain 1->4 %.1f/%.1f dB, 4->8 %.2f/%.2f dB %s; ",
                  c14m, c14t, c48m, c48t, c_ok ? "yes" : "NO");
    detail += buf;

    // (d) m_tau sweep, same pattern
    const Curve mt = run_curve(SweepAxis::m_tau, {1, 2, 4, 8}, 20.0, 15, trials);
    const double d14m = mt.mmle[0] - mt.mmle[2];
    const double d48m = mt.mmle[2] - mt.mmle[3];
    const double d14t = mt.tse[0] - mt.tse[2];
    const double d48t = mt.tse[2] - mt.tse[3];
    const bool d_ok = d14m > 1.0 && d14t > 1.0 && d48m < 1.0 && d48t < 1.0;
    ok &= d_ok;
    std::snprintf(buf, sizeof buf, "(d) m_tau gain 1->4 %.1f/%.1f dB, 4->8 %.2f/%.2f dB %s; ",
                  d14m, d14t, d48m, d48t, d_ok ? "yes" : "NO");
    detail += buf;

    // (e) epsilon sweep at PSNR 20, T_max = 50 as in the reference experiment
    const Curve eps =
        run_curve(SweepAxis::epsilon, {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}, 20.0, 50, trials);
    size_t am = 0;
    for (size_t i = 1; i < eps.mmle.size(); ++i)
        if (eps.mmle[i] < eps.mmle[am]) am = i;
    const bool e_ok = am > 0 && am + 1 < eps.mmle.size() && eps.axis[am] <= 1e-3 &&
                      eps.axis[am] >= 1e-5;
    ok &= e_ok;
    std::snprintf(buf, sizeof buf, "(e) interior NMSE minimum at eps=%.0e %s; ", eps.axis[am],
                  e_ok ? "yes" : "NO");
    detail += buf;

    // (f) N sweep at M = 64, PSNR 20
    const Curve nsw = run_curve(SweepAxis::n, {8, 16, 32, 64}, 20.0, 15, trials);
    const bool fm = non_increasing(nsw.mmle);
    const bool ft = non_increasing(nsw.tse);
    const bool fi = non_increasing(nsw.impulse);
    const bool f_ok = fm && ft && fi;
    ok &= f_ok;
    std::snprintf(buf, sizeof buf, "(f) NMSE falls with N: mmle %s, tse %s, impulse %s",
                  fm ? "yes" : "NO", ft ? "yes" : "NO", fi ? "yes" : "NO");
    detail += buf;

    const double elapsed = now_s() - t0;
    if (elapsed > 7200.0) ok = false;
    std::snprintf(buf, sizeof buf, "; %d trials/point, %.0f s", trials, elapsed);
    detail += buf;
    report(6, "ordinal NMSE reproduction across the five sweep axes", ok, detail);
    print_curve("psnr", psnr);
    print_curve("n_nu", nnu);
    print_curve("m_tau", mt);
    print_curve("eps", eps);
    print_curve("N", nsw);
}

// --------------------------------------------------------------------------
// 7. decoupling validity (approximate vs exact ML)
// --------------------------------------------------------------------------
void criterion_7() {
    FrameParams p;
    p.m = 32;
    p.n = 16;
    p.delta_f = 30e3;
    p.pilot_l = 16;
    p.pilot_k = 8;
    p.tau_max = 7e-6;
    p.nu_max = 5000.0;
    p.pilot_energy = psnr_to_pilot_energy(30.0, p, 1.0);

    std::vector<std::pair<double, double>> grid;
    for (int idx : support_region(p)) {
        const auto [l, k] = unflatten(idx, p);
        const int dl = ((l - p.pilot_l) % p.m + p.m) % p.m;
        const int dk = signed_doppler_index(k - p.pilot_k, p.n);
        grid.emplace_back(std::min(dl * p.T() / p.m, p.tau_max), dk * p.delta_f / p.n);
    }

    EstimatorConfig cfg;
    cfg.m_tau = 1;
    cfg.n_nu = 1;  // the shared coarse grid: DDRE centers
    cfg.t_max = 3;
    cfg.epsilon = 1e-30;

    int agree = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(trial_seed(909, trial));
        ChannelState ch;
        const double nt = p.n * p.T();
        const double v1 = -(2.0 + 0.6 * rng.uniform()) / nt;
        const double v2 = (2.0 + 0.6 * rng.uniform()) / nt;  // |v1-v2| N T >= 4
        const double g1 = 0.6 + 0.4 * rng.uniform();
        const double g2 = 0.6 + 0.4 * rng.uniform();
        const double ph1 = 2 * pi * rng.uniform(), ph2 = 2 * pi * rng.uniform();
        const double norm = std::sqrt(g1 * g1 + g2 * g2);
        ch.paths.push_back({g1 / norm * cplx(std::cos(ph1), std::sin(ph1)),
                            rng.uniform() * p.tau_max, v1});
        ch.paths.push_back({g2 / norm * cplx(std::cos(ph2), std::sin(ph2)),
                            rng.uniform() * p.tau_max, v2});

        DdVector x(p);
        for (const auto& path : ch.paths) {
            const auto col = a_column(path.tau, path.nu, p);
            for (int i = 0; i < p.size(); ++i) x.data[i] += path.gain * col.a.data[i];
        }
        const double s = std::sqrt(static_cast<double>(p.m) * p.n);
        for (auto& v : x.data) v += s * rng.cnormal();

        const auto ml = ml_reference(x, p, 2, grid);
        const auto mm = mmle_estimate(x, cfg, p);  // two grid-restricted iterations

        auto same = [](double a, double b) { return std::abs(a - b) < 1e-15; };
        bool match = mm.size() >= 2;
        for (int i = 0; i < 2 && match; ++i) {
            const bool m0 = same(ml.taus[i], mm.taus[0]) && same(ml.nus[i], mm.nus[0]);
            const bool m1 = same(ml.taus[i], mm.taus[1]) && same(ml.nus[i], mm.nus[1]);
            if (!m0 && !m1) match = false;
        }
        agree += match;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "grid argmax agreement %d/100 (>=95)", agree);
    report(7, "decoupled search matches the joint ML argmax for separated paths", agree >= 95,
           buf);
}

// --------------------------------------------------------------------------
// 8. complexity ordering
// --------------------------------------------------------------------------
void criterion_8() {
    AircraftScenarioConfig scen;
    FrameParams base = frame_64x32(30.0);
    base.pilot_energy = 1.0;

    const auto pts = measure_complexity(base, {{6, 6}, {12, 6}, {6, 12}}, scen, 111);
    FrameParams wide = base;
    wide.tau_max = 14e-6;  // doubles the delay spread, M_tau 15 -> 28
    AircraftScenarioConfig wscen = scen;
    wscen.tau_max = wide.tau_max;
    const auto wpts = measure_complexity(wide, {{6, 6}}, wscen, 111);

    auto per_iter = [](long long c, int it) { return static_cast<double>(c) / std::max(it, 1); };
    const auto& b = pts[0];
    const auto& m2 = pts[1];
    const auto& n2 = pts[2];
    const auto& w = wpts[0];

    bool ok = true;
    // M-MLE hypothesis work ~ m_tau * n_nu * M_tau * N_nu
    const double r_mt = per_iter(m2.mmle.inner_product_elems, m2.mmle_iterations) /
                        per_iter(b.mmle.inner_product_elems, b.mmle_iterations);
    const double want_mt = 13.0 / 7.0;
    ok &= std::abs(r_mt / want_mt - 1.0) <= 0.30;

    const double r_nn = per_iter(n2.mmle.inner_product_elems, n2.mmle_iterations) /
                        per_iter(b.mmle.inner_product_elems, b.mmle_iterations);
    ok &= std::abs(r_nn / want_mt - 1.0) <= 0.30;

    const double r_wide = per_iter(w.mmle.inner_product_elems, w.mmle_iterations) /
                          per_iter(b.mmle.inner_product_elems, b.mmle_iterations);
    const double want_wide = 28.0 / 15.0;  // M_tau ratio (N_nu unchanged)
    ok &= std::abs(r_wide / want_wide - 1.0) <= 0.30;

    // TSE: delay step ~ m_tau M_tau, Doppler step ~ n_nu N_nu, near-invariant across the other
    const double t_mt = per_iter(m2.tse.delay_elems, m2.tse_iterations) /
                        per_iter(b.tse.delay_elems, b.tse_iterations);
    ok &= std::abs(t_mt / want_mt - 1.0) <= 0.30;
    const double t_cross = per_iter(m2.tse.doppler_elems, m2.tse_iterations) /
                           per_iter(b.tse.doppler_elems, b.tse_iterations);
    ok &= std::abs(t_cross - 1.0) <= 0.10;
    const double t_nn = per_iter(n2.tse.doppler_elems, n2.tse_iterations) /
                        per_iter(b.tse.doppler_elems, b.tse_iterations);
    ok &= std::abs(t_nn / want_mt - 1.0) <= 0.30;

    const bool cheaper = b.tse.total_elems() < b.mmle.total_elems();
    ok &= cheaper;

    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "mmle growth x%.2f/%.2f/%.2f (want %.2f/%.2f/%.2f +-30%%), tse delay x%.2f, "
                  "tse doppler cross x%.2f, tse<mmle %s (%lld vs %lld elems)",
                  r_mt, r_nn, r_wide, want_mt, want_mt, want_wide, t_mt, t_cross,
                  cheaper ? "yes" : "NO", b.tse.total_elems(), b.mmle.total_elems());
    report(8, "instrumented counters follow the advertised complexity orders", ok, buf);
}

// --------------------------------------------------------------------------
// 9. determinism
// --------------------------------------------------------------------------
void criterion_9() {
    SweepConfig cfg;
    cfg.frame = frame_16x8();
    cfg.frame.pilot_energy = 1.0;
    cfg.scenario.paths = 4;
    cfg.estimators = {"mmle", "tse", "impulse"};
    cfg.axis = SweepAxis::psnr;
    cfg.axis_values = {10.0, 25.0};
    cfg.trials = 6;
    cfg.base_seed = 4242;
    cfg.record_wall_time = false;  // timing = none: reruns are byte-identical

    std::ostringstream first;
    write_csv(first, cfg, run_sweep(cfg));

    // reproduce the run purely from the CSV header
    std::istringstream parse_back(first.str());
    SweepConfig replay = sweep_config_from_csv_header(parse_back);
    setenv("OTFS_THREADS", "1", 1);
    std::ostringstream serial;
    write_csv(serial, replay, run_sweep(replay));
    setenv("OTFS_THREADS", "4", 1);
    std::ostringstream parallel;
    write_csv(parallel, replay, run_sweep(replay));
    unsetenv("OTFS_THREADS");

    const bool ok = first.str() == serial.str() && first.str() == parallel.str();
    char buf[120];
    std::snprintf(buf, sizeof buf, "header-replayed serial and parallel reruns %s byte-identical",
                  ok ? "are" : "are NOT");
    report(9, "sweeps reproduce byte-identically from their CSV header", ok, buf);
}

}  // namespace

int main() {
    std::printf("otfs-dd acceptance suite (code_version %s)\n", code_version);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
