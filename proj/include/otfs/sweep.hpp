// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "otfs/estimators.hpp"
#include "otfs/metrics.hpp"
#include "otfs/rng.hpp"
#include "otfs/scenarios.hpp"
#include "otfs/waveform.hpp"

namespace otfs {

inline constexpr const char* code_version = "0.1.0";

enum class SweepAxis { psnr, n, m_tau, n_nu, epsilon };
enum class NoisePath { fast, oracle };

inline std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::psnr: return "psnr";
        case SweepAxis::n: return "N";
        case SweepAxis::m_tau: return "m_tau";
        case SweepAxis::n_nu: return "n_nu";
        case SweepAxis::epsilon: return "epsilon";
    }
    return "?";
}

struct SweepConfig {
    FrameParams frame;                       // E_p is overwritten from the PSNR
    AircraftScenarioConfig scenario;
    std::vector<std::string> estimators{"mmle", "tse", "impulse"};
    double psnr_db = 20.0;                   // fixed PSNR for non-PSNR axes
    SweepAxis axis = SweepAxis::psnr;
    std::vector<double> axis_values;
    int trials = 200;
    std::uint64_t base_seed = 1;
    int oversampling_q = 32;
    std::string output_path;
    EstimatorConfig estimator;
    double impulse_threshold_sigma = 3.0;
    NoisePath noise_path = NoisePath::fast;
    bool record_wall_time = true;            // timing = none makes reruns byte-identical

    void validate() const {
        frame.validate();
        estimator.validate();
        if (trials < 1) throw std::invalid_argument("SweepConfig: trials >= 1");
        if (axis_values.empty()) throw std::invalid_argument("SweepConfig: axis_values empty");
        for (const auto& e : estimators)
            if (e != "mmle" && e != "tse" && e != "impulse" && e != "ml_reference")
                throw std::invalid_argument("SweepConfig: unknown estimator '" + e + "'");
    }
};

struct SweepRecord {
    double axis_value = 0;
    std::string estimator;
    double nmse_db = 0;
    double mean_iterations = 0;
    double mean_hypothesis_evaluations = 0;
    double wall_time_s = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::string error;
};

namespace detail {

inline int worker_count() {
    if (const char* env = std::getenv("OTFS_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Received pilot frame for one trial: either the closed-form columns plus DD
/// noise CN(0, MN N0), or the full sampled chain.
inline DdVector received_pilot(const ChannelState& ch, const FrameParams& p, double n0,
                               NoisePath path, int q, Rng& rng) {
    if (path == NoisePath::fast) {
        DdVector x(p);
        for (const auto& pp : ch.paths) {
            const auto col = a_column(pp.tau, pp.nu, p);
            for (int i = 0; i < p.size(); ++i) x.data[i] += pp.gain * col.a.data[i];
        }
        const double s = std::sqrt(static_cast<double>(p.m) * p.n * n0);
        for (auto& v : x.data) v += s * rng.cnormal();
        return x;
    }
    NoiseSpec noise{n0, rng.raw()};
    return oracle_end_to_end(make_pilot_frame(p), ch, p, q, noise);
}

struct TrialResult {
    double nmse_linear = 0;
    double iterations = 0;
    double hypotheses = 0;
    std::string error;
};

}  // namespace detail

/// One (axis value, estimator) grid point: `trials` independent seeded draws,
/// estimate, reconstruct, accumulate linear NMSE. Trials run on up to
/// OTFS_THREADS workers; per-trial seeds derive from (base_seed, trial_index)
/// so results do not depend on scheduling, and aggregation is in trial order.
inline std::vector<SweepRecord> run_point(const SweepConfig& cfg, double axis_value) {
    FrameParams p = cfg.frame;
    EstimatorConfig est = cfg.estimator;
    double psnr_db = cfg.psnr_db;
    switch (cfg.axis) {
        case SweepAxis::psnr: psnr_db = axis_value; break;
        case SweepAxis::n:
            // resize the Doppler axis, keeping the pilot at the same relative spot
            p.pilot_k = cfg.frame.pilot_k * static_cast<int>(axis_value) / cfg.frame.n;
            p.n = static_cast<int>(axis_value);
            break;
        case SweepAxis::m_tau: est.m_tau = static_cast<int>(axis_value); break;
        case SweepAxis::n_nu: est.n_nu = static_cast<int>(axis_value); break;
        case SweepAxis::epsilon: est.epsilon = axis_value; break;
    }
    const double n0 = 1.0;  // only the ratio E_p/(MN N0) matters
    p.pilot_energy = psnr_to_pilot_energy(psnr_db, p, n0);
    p.validate();

    const size_t ne = cfg.estimators.size();
    std::vector<std::vector<detail::TrialResult>> results(
        ne, std::vector<detail::TrialResult>(cfg.trials));

    auto run_trial = [&](int trial) {
        Rng rng(trial_seed(cfg.base_seed, static_cast<std::uint64_t>(trial)));
        const ChannelState ch = aircraft_channel(cfg.scenario, p, rng);
        const DdVector x =
            detail::received_pilot(ch, p, n0, cfg.noise_path, cfg.oversampling_q, rng);
        for (size_t e = 0; e < ne; ++e) {
            auto& out = results[e][trial];
            try {
                PathEstimates pe;
                const std::string& name = cfg.estimators[e];
                if (name == "mmle") {
                    pe = mmle_estimate(x, est, p);
                } else if (name == "tse") {
                    pe = tse_estimate(x, est, p);
                } else if (name == "impulse") {
                    pe = impulse_baseline(x, p, cfg.impulse_threshold_sigma, n0);
                } else {  // ml_reference on the support-region cell centers
                    if (p.size() > 512 || cfg.scenario.paths > 2)
                        throw std::runtime_error("ml_reference requires MN <= 512 and P <= 2");
                    std::vector<std::pair<double, double>> grid;
                    for (int idx : support_region(p)) {
                        const auto [l, k] = unflatten(idx, p);
                        const int dl = ((l - p.pilot_l) % p.m + p.m) % p.m;
                        const int dk = signed_doppler_index(k - p.pilot_k, p.n);
                        grid.emplace_back(std::min(dl * p.T() / p.m, p.tau_max),
                                          dk * p.delta_f / p.n);
                    }
                    pe = ml_reference(x, p, cfg.scenario.paths, grid);
                }
                out.nmse_linear = nmse_from_paths(ch, pe, p);
                out.iterations = pe.iterations_run;
                out.hypotheses = static_cast<double>(pe.counters.hypothesis_evals +
                                                     pe.counters.delay_hypotheses +
                                                     pe.counters.doppler_hypotheses);
            } catch (const std::exception& ex) {
                out.error = ex.what();
            }
        }
    };

    const int workers = std::min(detail::worker_count(), cfg.trials);
    if (workers <= 1) {
        for (int t = 0; t < cfg.trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < cfg.trials; t += workers) run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<SweepRecord> records;
    for (size_t e = 0; e < ne; ++e) {
        SweepRecord rec;
        rec.axis_value = axis_value;
        rec.estimator = cfg.estimators[e];
        rec.trials = cfg.trials;
        rec.seed = cfg.base_seed;
        double acc = 0, it = 0, hy = 0;
        int ok = 0;
        for (int t = 0; t < cfg.trials; ++t) {
            const auto& r = results[e][t];
            if (!r.error.empty()) {
                if (rec.error.empty())
                    rec.error = "trial " + std::to_string(t) + ": " + r.error;
                continue;
            }
            acc += r.nmse_linear;
            it += r.iterations;
            hy += r.hypotheses;
            ++ok;
        }
        if (ok > 0) {
            rec.nmse_db = to_db(acc / ok);
            rec.mean_iterations = it / ok;
            rec.mean_hypothesis_evaluations = hy / ok;
        } else {
            rec.nmse_db = 0;
            if (rec.error.empty()) rec.error = "all trials failed";
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Self-describing CSV: the '#' header carries the full configuration under
/// the same keys the config-file parser accepts, so a run can be reproduced
/// from its own output.
inline void write_csv(std::ostream& os, const SweepConfig& cfg,
                      const std::vector<SweepRecord>& records) {
    char buf[256];
    os << "# otfs-dd sweep, code_version " << code_version << "\n";
    os << "# rng: mt19937_64+box-muller, trial seed splitmix64(base ^ splitmix64(trial+1))\n";
    os << "# base_seed = " << cfg.base_seed << "\n";
    os << "# m = " << cfg.frame.m << "\n# n = " << cfg.frame.n << "\n";
    std::snprintf(buf, sizeof buf, "# delta_f_hz = %.9g\n", cfg.frame.delta_f);
    os << buf;
    os << "# pilot_l = " << cfg.frame.pilot_l << "\n# pilot_k = " << cfg.frame.pilot_k << "\n";
    std::snprintf(buf, sizeof buf, "# tau_max_us = %.9g\n# nu_max_hz = %.9g\n",
                  cfg.frame.tau_max * 1e6, cfg.frame.nu_max);
    os << buf;
    os << "# paths = " << cfg.scenario.paths << "\n";
    std::snprintf(buf, sizeof buf, "# rice_k_db = %.9g\n# tau_slope_us = %.9g\n",
                  cfg.scenario.rice_k_db, cfg.scenario.tau_slope * 1e6);
    os << buf;
    std::snprintf(buf, sizeof buf, "# psnr_db = %.9g\n", cfg.psnr_db);
    os << buf;
    os << "# axis = " << axis_name(cfg.axis) << "\n";
    os << "# axis_values =";
    for (double v : cfg.axis_values) {
        std::snprintf(buf, sizeof buf, " %.9g", v);
        os << buf;
    }
    os << "\n# trials = " << cfg.trials << "\n";
    os << "# estimators =";
    for (const auto& e : cfg.estimators) os << " " << e;
    os << "\n";
    os << "# m_tau = " << cfg.estimator.m_tau << "\n# n_nu = " << cfg.estimator.n_nu << "\n";
    std::snprintf(buf, sizeof buf, "# epsilon = %.9g\n", cfg.estimator.epsilon);
    os << buf;
    os << "# t_max = " << cfg.estimator.t_max << "\n";
    os << "# support = " << (cfg.estimator.truncated_support ? "truncated" : "full") << "\n";
    std::snprintf(buf, sizeof buf, "# impulse_threshold_sigma = %.9g\n",
                  cfg.impulse_threshold_sigma);
    os << buf;
    os << "# q = " << cfg.oversampling_q << "\n";
    os << "# noise_path = " << (cfg.noise_path == NoisePath::fast ? "fast" : "oracle") << "\n";
    os << "# timing = " << (cfg.record_wall_time ? "wall" : "none") << "\n";
    os << "axis,estimator,nmse_db,mean_iters,mean_hypotheses,wall_time_s,trials,seed,error\n";
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.9g,%s,%.6f,%.4f,%.2f,%.3f,%d,%llu,%s\n", r.axis_value,
                      r.estimator.c_str(), r.nmse_db, r.mean_iterations,
                      r.mean_hypothesis_evaluations, r.wall_time_s, r.trials,
                      static_cast<unsigned long long>(r.seed), r.error.c_str());
        os << buf;
    }
}

/// Full Monte Carlo sweep: every axis value x estimator, optional CSV out.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<SweepRecord> all;
    for (double v : cfg.axis_values) {
        const auto t0 = std::chrono::steady_clock::now();
        auto recs = run_point(cfg, v);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
            std::max<size_t>(recs.size(), 1);
        for (auto& r : recs) {
            r.wall_time_s = cfg.record_wall_time ? dt : 0.0;
            all.push_back(std::move(r));
        }
    }
    if (!cfg.output_path.empty()) {
        std::ofstream f(cfg.output_path, std::ios::binary);
        if (!f) throw std::runtime_error("run_sweep: cannot open " + cfg.output_path);
        write_csv(f, cfg, all);
    }
    return all;
}

// ---------------------------------------------------------------------------
// Oracle validation and complexity measurement
// ---------------------------------------------------------------------------

struct OracleValidationRow {
    int q;
    double rel_mismatch;  // ||oracle - G x|| / ||G x||
};

struct OracleValidationReport {
    std::vector<OracleValidationRow> rows;
    bool monotone = true;
};

/// Relative Frobenius mismatch between the sampled chain and the closed-form
/// G x prediction for one channel draw, across oversampling factors; the
/// mismatch must shrink as Q grows.
inline OracleValidationReport run_oracle_validation(const FrameParams& p,
                                                    const std::vector<int>& q_list,
                                                    const ChannelState& ch, const DdVector& x) {
    OracleValidationReport rep;
    const auto g = assemble_G(ch, p);
    const DdVector gx = g.matvec(x);
    double gx_norm = std::sqrt(gx.energy());
    for (int q : q_list) {
        const DdVector y = oracle_end_to_end(x, ch, p, q);
        double diff = 0;
        for (int i = 0; i < p.size(); ++i) diff += std::norm(y.data[i] - gx.data[i]);
        rep.rows.push_back({q, std::sqrt(diff) / gx_norm});
    }
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].q > rep.rows[i - 1].q &&
            rep.rows[i].rel_mismatch >= rep.rows[i - 1].rel_mismatch)
            rep.monotone = false;
    return rep;
}

struct ComplexityPoint {
    int m_tau;
    int n_nu;
    OpCounters mmle;
    OpCounters tse;
    int mmle_iterations = 0;
    int tse_iterations = 0;
};

/// Instrumented operation counts for both estimators on one synthetic frame per
/// refinement setting; used to check the advertised complexity orders.
inline std::vector<ComplexityPoint> measure_complexity(
    const FrameParams& p, const std::vector<std::pair<int, int>>& refinements,
    const AircraftScenarioConfig& scen, std::uint64_t seed, double psnr_db = 30.0) {
    FrameParams fp = p;
    fp.pilot_energy = psnr_to_pilot_energy(psnr_db, fp, 1.0);
    Rng rng(seed);
    const ChannelState ch = aircraft_channel(scen, fp, rng);
    const DdVector x = detail::received_pilot(ch, fp, 1.0, NoisePath::fast, 32, rng);

    std::vector<ComplexityPoint> out;
    for (const auto& [mt, nn] : refinements) {
        EstimatorConfig cfg;
        cfg.m_tau = mt;
        cfg.n_nu = nn;
        ComplexityPoint pt;
        pt.m_tau = mt;
        pt.n_nu = nn;
        const auto em = mmle_estimate(x, cfg, fp);
        const auto et = tse_estimate(x, cfg, fp);
        pt.mmle = em.counters;
        pt.tse = et.counters;
        pt.mmle_iterations = em.iterations_run;
        pt.tse_iterations = et.iterations_run;
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plain-text "key = value" config files
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_config_text(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string tok;
    std::stringstream ss(s);
    while (ss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        std::replace(tok.begin(), tok.end(), ',', ' ');
        std::stringstream ts(tok);
        double v;
        while (ts >> v) out.push_back(v);
    }
    return out;
}

inline SweepConfig sweep_config_from_kv(std::map<std::string, std::string> kv) {
    SweepConfig cfg;
    auto geti = [&](const char* k, int d) { return kv.count(k) ? std::stoi(kv[k]) : d; };
    auto getd = [&](const char* k, double d) { return kv.count(k) ? std::stod(kv[k]) : d; };
    auto gets = [&](const char* k, std::string d) { return kv.count(k) ? kv[k] : d; };

    cfg.frame.m = geti("m", 64);
    cfg.frame.n = geti("n", 32);
    cfg.frame.delta_f = getd("delta_f_hz", 30e3);
    cfg.frame.pilot_l = geti("pilot_l", cfg.frame.m / 2);
    cfg.frame.pilot_k = geti("pilot_k", cfg.frame.n / 2);
    cfg.frame.tau_max = getd("tau_max_us", 7.0) * 1e-6;
    cfg.frame.nu_max = getd("nu_max_hz", 1700.0);
    cfg.frame.pilot_energy = 1.0;  // replaced per point from the PSNR

    cfg.scenario.paths = geti("paths", 5);
    cfg.scenario.rice_k_db = getd("rice_k_db", 15.0);
    cfg.scenario.tau_slope = getd("tau_slope_us", 1.0) * 1e-6;
    cfg.scenario.tau_max = cfg.frame.tau_max;
    cfg.scenario.nu_max = cfg.frame.nu_max;
    cfg.scenario.seed = static_cast<std::uint64_t>(geti("seed", 1));

    cfg.psnr_db = getd("psnr_db", 20.0);
    const std::string axis = gets("axis", "psnr");
    if (axis == "psnr") cfg.axis = SweepAxis::psnr;
    else if (axis == "N" || axis == "n") cfg.axis = SweepAxis::n;
    else if (axis == "m_tau") cfg.axis = SweepAxis::m_tau;
    else if (axis == "n_nu") cfg.axis = SweepAxis::n_nu;
    else if (axis == "epsilon") cfg.axis = SweepAxis::epsilon;
    else throw std::runtime_error("unknown axis: " + axis);

    cfg.axis_values = parse_double_list(gets("axis_values", ""));
    cfg.trials = geti("trials", 200);
    cfg.base_seed = static_cast<std::uint64_t>(std::stoull(gets("base_seed", "1")));
    cfg.oversampling_q = geti("q", 32);
    cfg.output_path = gets("output", "");
    cfg.estimator.m_tau = geti("m_tau", 6);
    cfg.estimator.n_nu = geti("n_nu", 6);
    cfg.estimator.epsilon = getd("epsilon", 1e-4);
    cfg.estimator.t_max = geti("t_max", 15);
    cfg.estimator.truncated_support = gets("support", "truncated") != "full";
    cfg.impulse_threshold_sigma = getd("impulse_threshold_sigma", 3.0);
    const std::string np = gets("noise_path", "fast");
    cfg.noise_path = np == "oracle" ? NoisePath::oracle : NoisePath::fast;
    cfg.record_wall_time = gets("timing", "wall") != "none";
    if (kv.count("estimators")) {
        cfg.estimators.clear();
        std::stringstream ss(kv["estimators"]);
        std::string tok;
        while (ss >> tok) {
            std::replace(tok.begin(), tok.end(), ',', ' ');
            std::stringstream ts(tok);
            std::string e;
            while (ts >> e) cfg.estimators.push_back(e);
        }
    }
    return cfg;
}

inline SweepConfig sweep_config_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    return sweep_config_from_kv(parse_config_text(f));
}

/// Rebuild the configuration from a sweep CSV's own '#' header block.
inline SweepConfig sweep_config_from_csv_header(std::istream& is) {
    std::string stripped;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("axis,estimator", 0) == 0) break;
        if (!line.empty() && line[0] == '#') {
            stripped.append(line.begin() + 1, line.end());
            stripped.push_back('\n');
        }
    }
    std::istringstream ss(stripped);
    return sweep_config_from_kv(parse_config_text(ss));
}

}  // namespace otfs
