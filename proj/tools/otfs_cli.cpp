// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: Monte Carlo sweeps, oracle validation, the
// illustration demos, complexity measurement, and single-frame estimation.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "otfs/estimators.hpp"
#include "otfs/metrics.hpp"
#include "otfs/scenarios.hpp"
#include "otfs/sweep.hpp"
#include "otfs/waveform.hpp"

using namespace otfs;

namespace {

int cmd_sweep(const std::string& config_path) {
    SweepConfig cfg = sweep_config_from_file(config_path);
    const auto records = run_sweep(cfg);
    if (cfg.output_path.empty()) write_csv(std::cout, cfg, records);
    for (const auto& r : records) {
        std::fprintf(stderr, "%s=%g %-12s nmse=%8.3f dB  iters=%.2f%s%s\n",
                     axis_name(cfg.axis).c_str(), r.axis_value, r.estimator.c_str(), r.nmse_db,
                     r.mean_iterations, r.error.empty() ? "" : "  error: ", r.error.c_str());
    }
    if (!cfg.output_path.empty())
        std::fprintf(stderr, "wrote %s\n", cfg.output_path.c_str());
    return 0;
}

void dump_g_binary(const EffectiveChannelMatrix& g, const FrameParams& p,
                   const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.write("OTFSG1", 6);
    const std::int32_t m = p.m, n = p.n;
    f.write(reinterpret_cast<const char*>(&m), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    // row-major complex64 pairs
    for (int r = 0; r < g.size(); ++r)
        for (int c = 0; c < g.size(); ++c) {
            const cplx v = g.entry(r, c);
            const float re = static_cast<float>(v.real());
            const float im = static_cast<float>(v.imag());
            f.write(reinterpret_cast<const char*>(&re), 4);
            f.write(reinterpret_cast<const char*>(&im), 4);
        }
}

void dump_waveform_binary(const SampledWaveform& w, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    for (const auto& v : w.samples) {  // interleaved float64 I/Q, little-endian
        const double re = v.real(), im = v.imag();
        f.write(reinterpret_cast<const char*>(&re), 8);
        f.write(reinterpret_cast<const char*>(&im), 8);
    }
}

int cmd_validate_oracle(const std::string& config_path, std::vector<int> q_list,
                        const std::string& dump_g_path, const std::string& dump_wave_path) {
    SweepConfig cfg = sweep_config_from_file(config_path);
    FrameParams p = cfg.frame;
    p.pilot_energy = psnr_to_pilot_energy(cfg.psnr_db, p, 1.0);
    p.validate();
    if (q_list.empty()) q_list = {8, 16, 32};
    std::sort(q_list.begin(), q_list.end());

    Rng rng(cfg.base_seed);
    const ChannelState ch = aircraft_channel(cfg.scenario, p, rng);
    const DdVector x = make_pilot_frame(p);
    const auto rep = run_oracle_validation(p, q_list, ch, x);

    std::printf("oracle vs closed-form G x (M=%d N=%d, %d paths, seed %llu)\n", p.m, p.n,
                cfg.scenario.paths, static_cast<unsigned long long>(cfg.base_seed));
    std::printf("%6s  %14s\n", "Q", "rel mismatch");
    for (const auto& row : rep.rows) std::printf("%6d  %14.6e\n", row.q, row.rel_mismatch);
    std::printf("monotone decreasing: %s\n", rep.monotone ? "yes" : "NO");

    if (!dump_g_path.empty()) {
        dump_g_binary(assemble_G(ch, p), p, dump_g_path);
        std::printf("wrote %s\n", dump_g_path.c_str());
    }
    if (!dump_wave_path.empty()) {
        const auto w = apply_channel(heisenberg_rect(isfft(x, p), q_list.back(), p), ch);
        dump_waveform_binary(w, dump_wave_path);
        std::printf("wrote %s (%zu samples, rate %.6g Hz, cp %d)\n", dump_wave_path.c_str(),
                    w.samples.size(), w.rate, w.cp_len);
    }
    return rep.monotone ? 0 : 1;
}

int cmd_demo(const std::string& scenario, const std::string& out_path, double psnr_db,
             std::uint64_t seed) {
    FrameParams p;
    ChannelState ch;
    if (scenario == "two-path-coarse") {
        std::tie(p, ch) = two_path_demo(TwoPathResolution::coarse);
    } else if (scenario == "two-path-fine") {
        std::tie(p, ch) = two_path_demo(TwoPathResolution::fine);
    } else if (scenario == "single-path") {
        p = single_path_demo_frame();
        ch = single_path_demo(p);
    } else {
        std::fprintf(stderr, "unknown demo scenario: %s\n", scenario.c_str());
        return 2;
    }
    const double n0 = 1.0;
    p.pilot_energy = psnr_to_pilot_energy(psnr_db, p, n0);

    std::vector<cplx> acc(p.size(), cplx(0, 0));
    for (const auto& path : ch.paths) {
        const auto col = a_column(path.tau, path.nu, p);
        for (int i = 0; i < p.size(); ++i) acc[i] += path.gain * col.a.data[i];
    }
    if (psnr_db < 200) {  // finite PSNR: add DD-domain noise
        Rng rng(seed);
        const double s = std::sqrt(static_cast<double>(p.m) * p.n * n0);
        for (auto& v : acc) v += s * rng.cnormal();
    }

    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "cannot open %s\n", out_path.c_str());
        return 1;
    }
    f << "# demo = " << scenario << "\n";
    f << "# m = " << p.m << "\n# n = " << p.n << "\n";
    f << "# pilot_l = " << p.pilot_l << "\n# pilot_k = " << p.pilot_k << "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "# delta_f_hz = %.9g\n# tau_max_us = %.9g\n# nu_max_hz = %.9g\n",
                  p.delta_f, p.tau_max * 1e6, p.nu_max);
    f << buf;
    std::snprintf(buf, sizeof buf, "# psnr_db = %.9g\n# seed = %llu\n", psnr_db,
                  static_cast<unsigned long long>(seed));
    f << buf << "l,k,re,im,magnitude\n";
    char row[192];
    for (int k = 0; k < p.n; ++k)
        for (int l = 0; l < p.m; ++l) {
            const cplx v = acc[k * p.m + l];
            std::snprintf(row, sizeof row, "%d,%d,%.9e,%.9e,%.9e\n", l, k, v.real(), v.imag(),
                          std::abs(v));
            f << row;
        }
    std::printf("wrote %s (%dx%d pilot magnitude map)\n", out_path.c_str(), p.m, p.n);
    return 0;
}

int cmd_complexity(const std::string& config_path) {
    SweepConfig cfg = sweep_config_from_file(config_path);
    FrameParams p = cfg.frame;
    const std::vector<std::pair<int, int>> refs = {
        {cfg.estimator.m_tau, cfg.estimator.n_nu},
        {2 * cfg.estimator.m_tau, cfg.estimator.n_nu},
        {cfg.estimator.m_tau, 2 * cfg.estimator.n_nu},
    };
    const auto pts = measure_complexity(p, refs, cfg.scenario, cfg.base_seed, cfg.psnr_db);
    std::printf("%6s %6s | %10s %12s %6s | %10s %10s %12s %6s\n", "m_tau", "n_nu", "mmle_hyp",
                "mmle_elems", "iters", "tse_hyp", "tse_hyp_v", "tse_elems", "iters");
    for (const auto& pt : pts) {
        std::printf("%6d %6d | %10lld %12lld %6d | %10lld %10lld %12lld %6d\n", pt.m_tau, pt.n_nu,
                    pt.mmle.hypothesis_evals, pt.mmle.total_elems(), pt.mmle_iterations,
                    pt.tse.delay_hypotheses, pt.tse.doppler_hypotheses, pt.tse.total_elems(),
                    pt.tse_iterations);
    }
    return 0;
}

int cmd_estimate(const std::string& frame_path, const std::string& estimator,
                 const std::string& config_path, const std::string& out_path) {
    SweepConfig cfg =
        config_path.empty() ? SweepConfig{} : sweep_config_from_file(config_path);

    std::ifstream f(frame_path);
    if (!f) {
        std::fprintf(stderr, "cannot open %s\n", frame_path.c_str());
        return 1;
    }
    // the frame file's own '#' header (as written by `demo`) overrides the config
    std::string header, line;
    std::vector<std::string> data_lines;
    while (std::getline(f, line)) {
        if (!line.empty() && line[0] == '#') {
            header.append(line.begin() + 1, line.end());
            header.push_back('\n');
        } else {
            data_lines.push_back(line);
        }
    }
    {
        std::istringstream hs(header);
        auto kv = parse_config_text(hs);
        if (kv.count("m")) cfg.frame.m = std::stoi(kv["m"]);
        if (kv.count("n")) cfg.frame.n = std::stoi(kv["n"]);
        if (kv.count("pilot_l")) cfg.frame.pilot_l = std::stoi(kv["pilot_l"]);
        if (kv.count("pilot_k")) cfg.frame.pilot_k = std::stoi(kv["pilot_k"]);
        if (kv.count("delta_f_hz")) cfg.frame.delta_f = std::stod(kv["delta_f_hz"]);
        if (kv.count("tau_max_us")) cfg.frame.tau_max = std::stod(kv["tau_max_us"]) * 1e-6;
        if (kv.count("nu_max_hz")) cfg.frame.nu_max = std::stod(kv["nu_max_hz"]);
        if (kv.count("psnr_db")) cfg.psnr_db = std::stod(kv["psnr_db"]);
    }
    FrameParams p = cfg.frame;
    p.pilot_energy = psnr_to_pilot_energy(cfg.psnr_db, p, 1.0);
    p.validate();

    DdVector x(p);
    int rows = 0;
    for (std::string& dl : data_lines) {
        if (dl.empty() || dl[0] == 'l') continue;
        std::replace(dl.begin(), dl.end(), ',', ' ');
        std::istringstream ss(dl);
        int l, k;
        double re, im;
        if (!(ss >> l >> k >> re >> im)) continue;
        x.at(l, k, p) = cplx(re, im);
        ++rows;
    }
    if (rows == 0) {
        std::fprintf(stderr, "no samples parsed from %s\n", frame_path.c_str());
        return 1;
    }

    PathEstimates est;
    if (estimator == "mmle")
        est = mmle_estimate(x, cfg.estimator, p);
    else if (estimator == "tse")
        est = tse_estimate(x, cfg.estimator, p);
    else if (estimator == "impulse")
        est = impulse_baseline(x, p, cfg.impulse_threshold_sigma, 1.0);
    else {
        std::fprintf(stderr, "unknown estimator: %s\n", estimator.c_str());
        return 2;
    }

    std::ostream* os = &std::cout;
    std::ofstream of;
    if (!out_path.empty()) {
        of.open(out_path, std::ios::binary);
        if (!of) {
            std::fprintf(stderr, "cannot open %s\n", out_path.c_str());
            return 1;
        }
        os = &of;
    }
    (*os) << "h_re,h_im,tau_s,nu_hz\n";
    char buf[160];
    for (size_t i = 0; i < est.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e\n", est.gains[i].real(),
                      est.gains[i].imag(), est.taus[i], est.nus[i]);
        (*os) << buf;
    }
    std::fprintf(stderr, "%zu paths, %d iterations, final residual %.3e%s\n", est.size(),
                 est.iterations_run, est.residual_energies.back(),
                 est.peaks_outside_support > 0 ? " (had peaks outside the pilot support)" : "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OTFS delay-Doppler channel estimation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, scenario, estimator, frame_path, dump_g_path,
        dump_wave_path;
    std::vector<int> q_list;
    double psnr_db = 40.0;
    std::uint64_t seed = 1;

    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo NMSE sweep from a config file");
    sweep->add_option("--config", config_path, "key = value config file")->required();

    auto* val = app.add_subcommand("validate-oracle",
                                   "compare the sampled chain against the closed-form channel");
    val->add_option("--config", config_path, "key = value config file")->required();
    val->add_option("--q", q_list, "oversampling factors (default 8 16 32)")->delimiter(',');
    val->add_option("--dump-g", dump_g_path, "write G as binary (magic OTFSG1, complex64)");
    val->add_option("--dump-waveform", dump_wave_path,
                    "write the received pilot waveform (interleaved float64 I/Q)");

    auto* demo = app.add_subcommand("demo", "emit the received-pilot magnitude maps");
    demo->add_option("--scenario", scenario, "two-path-coarse | two-path-fine | single-path")
        ->required();
    demo->add_option("--out", out_path, "output CSV path")->required();
    demo->add_option("--psnr", psnr_db, "pilot SNR in dB (default 40; >= 200 disables noise)");
    demo->add_option("--seed", seed, "noise seed");

    auto* cx = app.add_subcommand("complexity", "instrumented operation counts");
    cx->add_option("--config", config_path, "key = value config file")->required();

    auto* est = app.add_subcommand("estimate", "estimate paths from a received DD frame CSV");
    est->add_option("--frame", frame_path, "CSV rows l,k,re,im")->required();
    est->add_option("--estimator", estimator, "mmle | tse | impulse")->required();
    est->add_option("--config", config_path, "frame/estimator config file");
    est->add_option("--out", out_path, "output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(config_path);
        if (val->parsed()) return cmd_validate_oracle(config_path, q_list, dump_g_path, dump_wave_path);
        if (demo->parsed()) return cmd_demo(scenario, out_path, psnr_db, seed);
        if (cx->parsed()) return cmd_complexity(config_path);
        if (est->parsed()) return cmd_estimate(frame_path, estimator, config_path, out_path);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
