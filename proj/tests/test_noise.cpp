#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdelab/noise.hpp"
#include "spdelab/parallel.hpp"
#include "spdelab/quadrature.hpp"

using namespace spdelab;
using noise::WienerConfig;
using spectral::CovarianceSpec;

TEST_CASE("sample_increment distribution") {
    const double dt = 0.01;
    const int n = 100000;

    SUBCASE("white noise: first coordinate mean 0, variance q dt") {
        const WienerConfig cfg{4, CovarianceSpec::white(), 2024u};
        std::vector<double> xs(n);
        for (int s = 0; s < n; ++s) {
            rng::CounterStream stream(cfg.seed, static_cast<std::uint64_t>(s));
            xs[s] = noise::sample_increment(cfg, dt, stream, 0).coords(0);
        }
        const auto mv = par::mean_variance(xs);
        CHECK(std::abs(mv.mean) < 4.0 * std::sqrt(dt / n));
        CHECK(std::abs(mv.variance - dt) < 4.0 * dt * std::sqrt(2.0 / (n - 1)));
    }

    SUBCASE("fractional s = 1: coordinate i has variance dt/(i pi)^2") {
        const WienerConfig cfg{4, CovarianceSpec::fractional(1.0), 77u};
        for (int mode : {1, 3}) {
            std::vector<double> xs(n);
            for (int s = 0; s < n; ++s) {
                rng::CounterStream stream(cfg.seed, static_cast<std::uint64_t>(s));
                xs[s] = noise::sample_increment(cfg, dt, stream, 0).coords(mode - 1);
            }
            const double q = 1.0 / spectral::eigenvalue(mode);
            const auto mv = par::mean_variance(xs);
            CHECK(std::abs(mv.variance - q * dt) < 4.0 * q * dt * std::sqrt(2.0 / (n - 1)));
        }
    }

    SUBCASE("bit-identical under identical stream keys") {
        const WienerConfig cfg{16, CovarianceSpec::white(), 5u};
        rng::CounterStream a(cfg.seed, 3u), b(cfg.seed, 3u);
        const auto ia = noise::sample_increment(cfg, dt, a, 9);
        const auto ib = noise::sample_increment(cfg, dt, b, 9);
        for (int i = 0; i < 16; ++i) CHECK(ia.coords(i) == ib.coords(i));
    }

    SUBCASE("nonpositive dt rejected") {
        const WienerConfig cfg{4, CovarianceSpec::white(), 5u};
        rng::CounterStream s(cfg.seed, 0u);
        CHECK_THROWS_AS(noise::sample_increment(cfg, 0.0, s, 0), std::invalid_argument);
    }

    SUBCASE("coordinates independent across sample indices") {
        const WienerConfig cfg{2, CovarianceSpec::white(), 13u};
        const int pairs = 20000;
        std::vector<double> a(pairs), b(pairs);
        for (int s = 0; s < pairs; ++s) {
            rng::CounterStream sa(cfg.seed, 2 * static_cast<std::uint64_t>(s));
            rng::CounterStream sb(cfg.seed, 2 * static_cast<std::uint64_t>(s) + 1);
            a[s] = noise::sample_increment(cfg, dt, sa, 0).coords(0);
            b[s] = noise::sample_increment(cfg, dt, sb, 0).coords(0);
        }
        const auto ma = par::mean_variance(a), mb = par::mean_variance(b);
        double cov = 0.0;
        for (int s = 0; s < pairs; ++s) cov += (a[s] - ma.mean) * (b[s] - mb.mean);
        cov /= pairs - 1;
        const double corr = cov / std::sqrt(ma.variance * mb.variance);
        CHECK(std::abs(corr) < 4.0 / std::sqrt(double(pairs)));
    }
}

TEST_CASE("embed_in_fem") {
    fem::FemSpace space(fem::Mesh1D::uniform(16));
    noise::FemEmbedding embedding(space, 64);

    SUBCASE("single active mode reduces to the L2 projection of that mode") {
        noise::WienerIncrement inc{0.01, Eigen::VectorXd::Zero(64)};
        inc.coords(0) = 1.7;
        const auto embedded = noise::embed_in_fem(inc, embedding);
        auto mode = spectral::SpectralVector::unit(1, 1);
        mode *= 1.7;
        const auto projected = fem::l2_project(space, mode);
        CHECK((embedded.coeffs() - projected.coeffs()).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("projection contracts the L2 norm") {
        const WienerConfig cfg{64, CovarianceSpec::white(), 3131u};
        for (int s = 0; s < 20; ++s) {
            rng::CounterStream stream(cfg.seed, static_cast<std::uint64_t>(s));
            const auto inc = noise::sample_increment(cfg, 0.01, stream, 0);
            const auto embedded = noise::embed_in_fem(inc, embedding);
            CHECK(embedded.l2_norm() <= inc.coords.norm() * (1.0 + 1e-12));
        }
    }

    SUBCASE("linear in the increment") {
        noise::WienerIncrement i1{0.01, Eigen::VectorXd::Zero(64)};
        noise::WienerIncrement i2{0.01, Eigen::VectorXd::Zero(64)};
        rng::CounterStream s1(1u, 1u), s2(1u, 2u);
        s1.fill_normals(0, i1.coords.data(), 64);
        s2.fill_normals(0, i2.coords.data(), 64);
        noise::WienerIncrement combo{0.01, 2.0 * i1.coords - 3.0 * i2.coords};
        const auto e1 = noise::embed_in_fem(i1, embedding);
        const auto e2 = noise::embed_in_fem(i2, embedding);
        const auto ec = noise::embed_in_fem(combo, embedding);
        const Eigen::VectorXd lin = 2.0 * e1.coeffs() - 3.0 * e2.coeffs();
        CHECK((ec.coeffs() - lin).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("coupling: embeddings of one increment converge as meshes refine") {
        const WienerConfig cfg{128, CovarianceSpec::fractional(1.0), 99u};
        rng::CounterStream stream(cfg.seed, 0u);
        const auto inc = noise::sample_increment(cfg, 0.01, stream, 0);
        std::vector<double> gaps;
        for (int k : {3, 4, 5, 6}) {
            fem::FemSpace coarse(fem::Mesh1D::uniform(1 << k));
            fem::FemSpace fine(fem::Mesh1D::uniform(1 << (k + 1)));
            noise::FemEmbedding ec(coarse, 128), ef(fine, 128);
            const auto vc = noise::embed_in_fem(inc, ec);
            const auto vf = noise::embed_in_fem(inc, ef);
            const auto vc_on_fine = fem::prolong_uniform(vc, fine);
            const Eigen::VectorXd diff = vf.coeffs() - vc_on_fine.coeffs();
            gaps.push_back(std::sqrt(diff.dot(fine.mass_apply(diff))));
        }
        for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
    }

    SUBCASE("eigen route equals mass-solve route") {
        const WienerConfig cfg{64, CovarianceSpec::white(), 11u};
        rng::CounterStream stream(cfg.seed, 4u);
        const auto inc = noise::sample_increment(cfg, 0.02, stream, 0);
        const Eigen::VectorXd via_eigen = space.from_eigen_coords(embedding.eigen(inc.coords));
        const Eigen::VectorXd via_mass = embedding.nodal(inc.coords);
        CHECK((via_eigen - via_mass).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("truncation below N_h rejected") {
        CHECK_THROWS_AS(noise::FemEmbedding(space, 8), std::invalid_argument);
    }
}

TEST_CASE("ito isometry") {
    SUBCASE("identity integrand with trace-class covariance") {
        const WienerConfig cfg{8, CovarianceSpec::fractional(1.0), 441u};
        const double T = 0.1;
        const auto rep =
            noise::ito_isometry_check(cfg, noise::ItoIntegrand::identity, T, 1e-3, 20000, 2);
        double trace = 0.0;
        for (int i = 1; i <= 8; ++i) trace += cfg.covariance.mode_variance(i);
        CHECK(rep.analytic == doctest::Approx(T * trace).epsilon(1e-14));
        CHECK(rep.pass);
        CHECK(std::abs(rep.z) < 4.0);
    }

    SUBCASE("heat kernel integrand: white noise z-test") {
        const WienerConfig cfg{16, CovarianceSpec::white(), 7172u};
        const auto rep = noise::ito_isometry_check(cfg, noise::ItoIntegrand::heat_kernel, 0.01,
                                                   5e-6, 20000, 2);
        CHECK(rep.pass);
        // quadrature bias must sit well under the Monte Carlo noise here
        CHECK(std::abs(rep.discrete_mean - rep.analytic) < rep.stderr_);
    }

    SUBCASE("heat kernel closed form matches a termwise quadrature oracle") {
        const WienerConfig cfg{6, CovarianceSpec::white(), 0u};
        const double T = 0.05;
        double oracle = 0.0;
        for (int i = 1; i <= 6; ++i)
            oracle += quad::composite(
                [&](double t) { return std::exp(-2.0 * spectral::eigenvalue(i) * (T - t)); }, 0.0,
                T, 200, 12);
        CHECK(noise::ito_analytic_value(cfg, noise::ItoIntegrand::heat_kernel, T) ==
              doctest::Approx(oracle).epsilon(1e-10));
    }

    SUBCASE("discrete mean converges to the analytic value as dt -> 0") {
        const WienerConfig cfg{8, CovarianceSpec::white(), 0u};
        const double T = 0.02;
        const double analytic =
            noise::ito_analytic_value(cfg, noise::ItoIntegrand::heat_kernel, T);
        double prev = 1e300;
        for (double dt : {1e-4, 1e-5, 1e-6}) {
            const double gap = std::abs(
                noise::ito_discrete_mean(cfg, noise::ItoIntegrand::heat_kernel, T, dt) - analytic);
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-6);
    }

    SUBCASE("zero integrand is exactly zero") {
        const WienerConfig cfg{4, CovarianceSpec::white(), 1u};
        const auto rep =
            noise::ito_isometry_check(cfg, noise::ItoIntegrand::zero, 0.01, 1e-3, 200, 1);
        CHECK(rep.empirical == 0.0);
        CHECK(rep.analytic == 0.0);
        CHECK(rep.z == 0.0);
        CHECK(rep.pass);
    }

    SUBCASE("dt not dividing T rejected") {
        const WienerConfig cfg{4, CovarianceSpec::white(), 1u};
        CHECK_THROWS_AS(
            noise::ito_isometry_check(cfg, noise::ItoIntegrand::identity, 0.01, 3e-3, 100, 1),
            std::invalid_argument);
    }
}
