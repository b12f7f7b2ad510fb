#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdelab/philox.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/spectral.hpp"

using namespace spdelab;
using spectral::SpectralVector;

namespace {

SpectralVector random_vector(int modes, std::uint64_t sample) {
    std::vector<double> c(modes);
    rng::CounterStream(4242u, sample).fill_normals(0, c.data(), c.size());
    return SpectralVector(std::move(c));
}

// Independent oracle: plain summation of lambda_i^(2 gamma) v_i^2.
double power_norm_by_summation(double gamma, const SpectralVector& v) {
    double s = 0.0;
    for (int i = 1; i <= v.modes(); ++i)
        s += std::pow(spectral::eigenvalue(i), 2.0 * gamma) * v.coef(i) * v.coef(i);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("eigenpairs: ordering and L2 orthonormality under quadrature") {
    CHECK(spectral::eigenvalue(1) == doctest::Approx(spectral::kPi * spectral::kPi));
    for (int i = 1; i < 32; ++i) CHECK(spectral::eigenvalue(i) < spectral::eigenvalue(i + 1));

    // Gauss-Legendre order 8 on panels shorter than 1/(4 max mode).
    const int max_mode = 12;
    const int panels = 4 * max_mode;
    for (int i = 1; i <= max_mode; ++i)
        for (int j = i; j <= max_mode; ++j) {
            const double ip = quad::composite(
                [&](double x) {
                    return spectral::eigenfunction(i, x) * spectral::eigenfunction(j, x);
                },
                0.0, 1.0, panels, 8);
            CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("parseval: coefficient norm equals quadrature L2 norm") {
    const auto v = random_vector(24, 1);
    const double quad_norm = std::sqrt(quad::composite(
        [&](double x) {
            const double y = v.evaluate(x);
            return y * y;
        },
        0.0, 1.0, 4 * 24, 8));
    CHECK(v.norm() == doctest::Approx(quad_norm).epsilon(1e-8));
}

TEST_CASE("apply_fractional") {
    const auto v = random_vector(16, 2);
    SUBCASE("gamma = 0 is the identity") {
        const auto w = spectral::apply_fractional(0.0, v);
        for (int i = 1; i <= 16; ++i) CHECK(w.coef(i) == v.coef(i));
    }
    SUBCASE("gamma = 1/2 on e_1 gives pi") {
        const auto w = spectral::apply_fractional(0.5, SpectralVector::unit(8, 1));
        CHECK(w.coef(1) == doctest::Approx(spectral::kPi).epsilon(1e-15));
    }
    SUBCASE("|A^{1/4} v| matches the summation oracle to 1e-12") {
        const auto w = random_vector(64, 3);
        const double via_op = spectral::apply_fractional(0.25, w).norm();
        CHECK(via_op == doctest::Approx(power_norm_by_summation(0.25, w)).epsilon(1e-12));
        CHECK(w.hdot_norm(0.5) == doctest::Approx(power_norm_by_summation(0.25, w)).epsilon(1e-12));
    }
}

TEST_CASE("semigroup_apply") {
    const auto v = random_vector(12, 4);
    SUBCASE("t = 0 is the identity") {
        const auto w = spectral::semigroup_apply(0.0, v);
        for (int i = 1; i <= 12; ++i) CHECK(w.coef(i) == v.coef(i));
    }
    SUBCASE("single-mode decay") {
        const auto w = spectral::semigroup_apply(1.0, SpectralVector::unit(4, 1));
        CHECK(w.coef(1) == doctest::Approx(std::exp(-spectral::kPi * spectral::kPi)));
    }
    SUBCASE("negative time rejected") {
        CHECK_THROWS_AS(spectral::semigroup_apply(-1e-9, v), std::invalid_argument);
    }
    SUBCASE("semigroup property holds exactly coefficientwise") {
        const auto a = spectral::semigroup_apply(0.25, spectral::semigroup_apply(0.5, v));
        const auto b = spectral::semigroup_apply(0.75, v);
        for (int i = 1; i <= 12; ++i)
            CHECK(a.coef(i) == doctest::Approx(b.coef(i)).epsilon(1e-15));
    }
    SUBCASE("commutes with fractional powers") {
        const auto a = spectral::apply_fractional(0.3, spectral::semigroup_apply(0.1, v));
        const auto b = spectral::semigroup_apply(0.1, spectral::apply_fractional(0.3, v));
        for (int i = 1; i <= 12; ++i)
            CHECK(a.coef(i) == doctest::Approx(b.coef(i)).epsilon(1e-15));
    }
    SUBCASE("smoothing: |A^g S(t) e_m| below the scalar calculus bound") {
        // max over lambda of lambda^g e^{-lambda t} = (g/(e t))^g
        for (double g : {0.25, 0.5, 1.0})
            for (double t : {1e-3, 1e-2, 1e-1})
                for (int m : {1, 3, 10, 40}) {
                    const auto w = spectral::apply_fractional(
                        g, spectral::semigroup_apply(t, SpectralVector::unit(64, m)));
                    const double bound = std::pow(g / (std::numbers::e * t), g);
                    CHECK(w.norm() <= bound * (1.0 + 1e-12));
                }
    }
}

TEST_CASE("spectral_project") {
    const auto v = random_vector(16, 5);
    SUBCASE("projecting to own mode count is the identity") {
        const auto w = spectral::spectral_project(16, v);
        for (int i = 1; i <= 16; ++i) CHECK(w.coef(i) == v.coef(i));
    }
    SUBCASE("e_{m+1} projects to zero") {
        const auto w = spectral::spectral_project(7, SpectralVector::unit(8, 8));
        CHECK(w.norm() == 0.0);
    }
    SUBCASE("m = 0 rejected") {
        CHECK_THROWS_AS(spectral::spectral_project(0, v), std::invalid_argument);
    }
    SUBCASE("projection contracts") {
        for (int m : {1, 4, 9}) CHECK(spectral::spectral_project(m, v).norm() <= v.norm());
    }
    SUBCASE("tail bound |(I-P_m) A^{-r}| attains lambda_{m+1}^{-r} on the basis") {
        const int modes = 256, m = 96;
        for (double r : {0.5, 1.0, 2.0}) {
            double best = 0.0;
            for (int i = 1; i <= modes; ++i) {
                auto u = spectral::apply_fractional(-r, SpectralVector::unit(modes, i));
                auto tail = u - spectral::spectral_project(m, u);
                best = std::max(best, tail.norm());
            }
            CHECK(best == doctest::Approx(std::pow(spectral::eigenvalue(m + 1), -r))
                              .epsilon(1e-13));
        }
    }
    SUBCASE("|P_m A^r e_i| <= lambda_m^r on retained modes") {
        const int modes = 64, m = 20;
        for (double r : {0.5, 1.0}) {
            for (int i = 1; i <= m; ++i) {
                const auto w = spectral::spectral_project(
                    m, spectral::apply_fractional(r, SpectralVector::unit(modes, i)));
                CHECK(w.norm() <= std::pow(spectral::eigenvalue(m + 1), r) * (1.0 + 1e-14));
            }
        }
    }
}

TEST_CASE("covariance specs") {
    const auto white = spectral::CovarianceSpec::white();
    CHECK(white.mode_variance(17) == 1.0);
    CHECK_FALSE(white.trace_class());

    const auto frac = spectral::CovarianceSpec::fractional(1.0);
    CHECK(frac.mode_variance(2) == doctest::Approx(1.0 / spectral::eigenvalue(2)));
    CHECK(frac.trace_class());
    CHECK_FALSE(spectral::CovarianceSpec::fractional(0.4).trace_class());

    const auto diag = spectral::CovarianceSpec::diagonal({1.0, 0.5, 0.0});
    CHECK(diag.mode_variance(2) == 0.5);
    CHECK(diag.mode_variance(9) == 0.0);
    CHECK(diag.trace_class());
    CHECK_THROWS_AS(spectral::CovarianceSpec::diagonal({-1.0}), std::invalid_argument);
}

TEST_CASE("regularity_beta") {
    const double tol = 0.1;
    SUBCASE("white noise: beta just below 1/2") {
        const double beta = spectral::regularity_beta(spectral::CovarianceSpec::white(), tol);
        CHECK(beta < 0.5);
        CHECK(beta > 0.35);
    }
    SUBCASE("fractional s = 0.75 saturates the cap") {
        CHECK(spectral::regularity_beta(spectral::CovarianceSpec::fractional(0.75), tol) == 1.0);
    }
    SUBCASE("fractional s = 0.25 lands at 0.75 within tolerance") {
        const double beta =
            spectral::regularity_beta(spectral::CovarianceSpec::fractional(0.25), tol);
        CHECK(std::abs(beta - 0.75) <= tol);
    }
    SUBCASE("finite diagonal always returns the cap") {
        CHECK(spectral::regularity_beta(spectral::CovarianceSpec::diagonal({3.0, 2.0, 1.0}),
                                        tol) == 1.0);
    }
    SUBCASE("bisection agrees with a grid-scan oracle of the same tail test") {
        for (double s : {0.0, 0.25}) {
            const auto q = s == 0.0 ? spectral::CovarianceSpec::white()
                                    : spectral::CovarianceSpec::fractional(s);
            // oracle: scan a fine grid for the largest convergent beta
            double flip = 0.0;
            for (double b = 0.0; b <= 1.0; b += 1.0 / 512)
                if (spectral::tail_converges(q, b, tol)) flip = b;
            const double beta = spectral::regularity_beta(q, tol);
            CHECK(std::abs(beta - flip) <= tol);
        }
    }
}

TEST_CASE("mixed mode counts zero-pad") {
    SpectralVector a(std::vector<double>{1.0, 2.0});
    SpectralVector b(std::vector<double>{1.0, 1.0, 3.0});
    const auto sum = a + b;
    CHECK(sum.modes() == 3);
    CHECK(sum.coef(1) == 2.0);
    CHECK(sum.coef(2) == 3.0);
    CHECK(sum.coef(3) == 3.0);
    CHECK(spectral::inner(a, b) == doctest::Approx(3.0));
}
