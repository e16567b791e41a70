// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "otfs/frame.hpp"

using namespace otfs;

namespace {
FrameParams reference_frame() {
    FrameParams p;
    p.m = 64;
    p.n = 32;
    p.delta_f = 30e3;
    p.pilot_l = 32;
    p.pilot_k = 16;
    p.tau_max = 7e-6;
    p.nu_max = 1700.0;
    return p;
}
}  // namespace

TEST_CASE("flat_index follows the vectorization order") {
    FrameParams p;
    p.m = 64;
    p.n = 32;
    CHECK(flat_index(0, 0, p) == 0);
    CHECK(flat_index(p.m - 1, p.n - 1, p) == p.m * p.n - 1);

    FrameParams q;
    q.m = 4;
    q.n = 8;
    CHECK(flat_index(2, 1, q) == 6);

    CHECK_THROWS_AS(flat_index(-1, 0, p), std::out_of_range);
    CHECK_THROWS_AS(flat_index(0, p.n, p), std::out_of_range);
}

TEST_CASE("unflatten inverts flat_index everywhere") {
    FrameParams p;
    p.m = 6;
    p.n = 5;
    for (int i = 0; i < p.size(); ++i) {
        const auto [l, k] = unflatten(i, p);
        CHECK(flat_index(l, k, p) == i);
    }
    CHECK_THROWS_AS(unflatten(p.size(), p), std::out_of_range);
}

TEST_CASE("signed_doppler_index wraps into [-floor(N/2), ceil(N/2))") {
    CHECK(signed_doppler_index(0, 32) == 0);
    CHECK(signed_doppler_index(15, 32) == 15);
    CHECK(signed_doppler_index(16, 32) == -16);
    CHECK(signed_doppler_index(31, 32) == -1);
    CHECK(signed_doppler_index(-1, 32) == -1);
    CHECK(signed_doppler_index(33, 32) == 1);
    CHECK(signed_doppler_index(3, 7) == 3);
    CHECK(signed_doppler_index(4, 7) == -3);
}

TEST_CASE("refined 2-D grid point counts") {
    FrameParams p = reference_frame();
    CHECK(refined_grid_2d(3, 1, {6, 6}, p).size() == 49);

    const auto single = refined_grid_2d(3, 1, {1, 1}, p);
    REQUIRE(single.size() == 1);
    CHECK(single[0].first == Catch::Approx(3 * p.T() / p.m).epsilon(1e-15));
    CHECK(single[0].second == Catch::Approx(1 * p.delta_f / p.n).epsilon(1e-15));
}

TEST_CASE("refined delay grid values by direct evaluation") {
    FrameParams p;
    p.m = 4;
    p.n = 4;
    p.delta_f = 1.0;
    p.tau_max = 0.9;
    const auto pts = refined_grid_2d(1, 0, {3, 1}, p);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].first == Catch::Approx(0.25 - 1.0 / 12).margin(1e-15));
    CHECK(pts[1].first == Catch::Approx(0.25).margin(1e-15));
    CHECK(pts[2].first == Catch::Approx(0.25 + 1.0 / 12).margin(1e-15));
    for (const auto& [tau, nu] : pts) CHECK(nu == 0.0);

    // Lambda_tau^{(0)} with m_tau = 3, M = 8: {-1/24, 0, 1/24} before clamping,
    // so the emitted set is {0, 0, 1/24}.
    FrameParams q;
    q.m = 8;
    q.n = 4;
    q.delta_f = 1.0;
    const auto taus = refined_grid_tau(0, 3, q);
    REQUIRE(taus.size() == 3);
    CHECK(taus[0] == 0.0);
    CHECK(taus[1] == 0.0);
    CHECK(taus[2] == Catch::Approx(1.0 / 24).margin(1e-15));
}

TEST_CASE("refined grids have odd-symmetric offsets and stay near the center") {
    FrameParams p = reference_frame();
    for (int m_tau : {1, 2, 5, 6}) {
        const auto taus = refined_grid_tau(10, m_tau, p);
        const double center = 10 * p.T() / p.m;
        REQUIRE(static_cast<int>(taus.size()) == 2 * (m_tau / 2) + 1);
        for (size_t i = 0; i < taus.size(); ++i) {
            const double off = taus[i] - center;
            const double mirror = taus[taus.size() - 1 - i] - center;
            CHECK(off == Catch::Approx(-mirror).margin(1e-18));
            CHECK(std::abs(off) <= 0.5 * p.T() / p.m + 1e-15);
        }
    }
    for (int n_nu : {1, 4, 6}) {
        const auto nus = refined_grid_nu(-2, n_nu, p);
        const double center = -2 * p.delta_f / p.n;
        for (size_t i = 0; i < nus.size(); ++i) {
            const double off = nus[i] - center;
            CHECK(off == Catch::Approx(-(nus[nus.size() - 1 - i] - center)).margin(1e-12));
            CHECK(std::abs(off) <= 0.5 * p.delta_f / p.n + 1e-9);
        }
    }
}

TEST_CASE("support region matches the spread bounds") {
    FrameParams p = reference_frame();
    CHECK(p.m_tau() == 15);
    CHECK(p.n_nu() == 5);
    const auto region = support_region(p);
    CHECK(region.size() == 75);
    for (int idx : region) CHECK((idx >= 0 && idx < p.size()));

    // degenerate spreads collapse to the pilot cell
    FrameParams z = reference_frame();
    z.tau_max = 0;
    z.nu_max = 0;
    const auto one = support_region(z);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == flat_index(z.pilot_l, z.pilot_k, z));

    FrameParams big = reference_frame();
    big.m = 128;
    CHECK(big.m_tau() == 28);
    CHECK(support_region(big).size() == static_cast<size_t>(big.m_tau() * big.n_nu()));
}

TEST_CASE("support region wraps around the frame edges") {
    FrameParams p = reference_frame();
    p.pilot_l = 60;  // M_tau = 15 runs past M-1
    p.pilot_k = 0;   // Doppler offsets reach below zero
    const auto region = support_region(p);
    CHECK(region.size() == 75);
    std::vector<int> sorted = region;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("channel path integer/fractional decomposition reconstructs") {
    FrameParams p = reference_frame();
    ChannelPath path{cplx(0.4, -0.3), 3.37 / (p.m * p.delta_f), -1.41 / (p.n * p.T())};
    const int lt = path.delay_index(p);
    const double it = path.delay_fraction(p);
    const int kn = path.doppler_index(p);
    const double kp = path.doppler_fraction(p);
    CHECK(lt == 3);
    CHECK(std::abs(it) <= 0.5);
    CHECK(kn == -1);
    CHECK(std::abs(kp) <= 0.5);
    CHECK((lt + it) / (p.m * p.delta_f) == Catch::Approx(path.tau).epsilon(1e-15));
    CHECK((kn + kp) / (p.n * p.T()) == Catch::Approx(path.nu).epsilon(1e-15));
}

TEST_CASE("frame and channel validation rejects bad inputs") {
    FrameParams p = reference_frame();
    CHECK_NOTHROW(p.validate());

    FrameParams bad = p;
    bad.tau_max = bad.T();  // must be strictly below T
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = p;
    bad.pilot_l = p.m;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = p;
    bad.nu_max = 0.6 * p.delta_f * p.n / (2.0 * p.n);  // N_nu would exceed N
    bad.nu_max = p.delta_f;                            // way past the representable band
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ChannelState ch;
    ch.paths.push_back({cplx(1, 0), 0.0, 0.0});
    ch.normalized = true;
    CHECK_NOTHROW(ch.validate(p));
    ch.paths[0].gain = cplx(0.5, 0);
    CHECK_THROWS_AS(ch.validate(p), std::invalid_argument);
    ch.normalized = false;
    ch.paths[0].tau = p.tau_max * 1.5;
    CHECK_THROWS_AS(ch.validate(p), std::invalid_argument);
}
