// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "otfs/kernels.hpp"
#include "otfs/rng.hpp"

using namespace otfs;

TEST_CASE("sinc") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(sinc(-3.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(sinc(0.5) == Catch::Approx(2.0 / pi).epsilon(1e-12));
    CHECK(sinc(1e-10) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("Dirichlet kernel closed form") {
    CHECK(doppler_kernel(0.0, 8) == cplx(1.0, 0.0));
    CHECK(std::abs(doppler_kernel(1.0 / 8, 8)) == Catch::Approx(0.0).margin(1e-14));
    CHECK(std::abs(doppler_kernel(-2.0, 16) - cplx(1.0, 0.0)) < 1e-12);

    // magnitude form |sin(pi N x)/(N sin(pi x))| away from integers
    const double x = 0.173;
    const int n = 32;
    const double mag = std::abs(std::sin(pi * n * x) / (n * std::sin(pi * x)));
    CHECK(std::abs(doppler_kernel(x, n)) == Catch::Approx(mag).epsilon(1e-12));
}

TEST_CASE("Dirichlet closed form equals the literal sum") {
    double worst = 0;
    for (int n : {1, 2, 3, 7, 8, 32, 101, 256}) {
        for (int i = 0; i <= 400; ++i) {
            const double x = -2.0 + i * 0.01;
            worst = std::max(worst, std::abs(doppler_kernel(x, n) - doppler_kernel_sum(x, n)));
        }
        // right at and just off the removable singularities
        for (double x : {0.0, 1.0, -1.0, 2.0, 1e-12, 1.0 - 1e-12, -2.0 + 1e-11}) {
            worst = std::max(worst, std::abs(doppler_kernel(x, n) - doppler_kernel_sum(x, n)));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("f kernel collapses for the on-grid path") {
    FrameParams p;
    p.m = 8;
    p.n = 4;
    p.delta_f = 30e3;
    p.tau_max = 8e-6;
    for (int m = 0; m < p.m; ++m)
        for (int k : {0, 2})
            for (int lp : {0, 3, 7})
                CHECK(std::abs(f_kernel(0.0, 0.0, k, lp, m, p) - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("precomputed tables reproduce the literal double sum") {
    FrameParams p;
    p.m = 8;
    p.n = 4;
    p.delta_f = 30e3;
    p.tau_max = 8e-6;
    Rng rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        const double tau = rng.uniform() * 0.3 * p.T();
        const double nu = (rng.uniform() - 0.5) * 0.4 * p.delta_f;
        DelayTables t(tau, nu, p);
        for (int k = 0; k < p.n; ++k)
            for (int lp = 0; lp < p.m; ++lp)
                for (int m = 0; m < p.m; ++m) {
                    const cplx lit = f_kernel(tau, nu, k, lp, m, p);
                    CHECK(std::abs(t.f(k, lp, m, p) - lit) < 1e-12);
                }
    }
}
