#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdelab/parallel.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/quadrature.hpp"

using namespace spdelab;

// Known-answer vectors for Philox4x32-10 from the reference distribution of
// Salmon et al.; counter and key words are little-endian 32-bit lanes.
TEST_CASE("philox4x32-10 known answers") {
    using P = rng::Philox4x32;
    {
        const auto out = P::block({0u, 0u, 0u, 0u}, {0u, 0u});
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                  {0xffffffffu, 0xffffffffu});
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const auto out = P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                  {0xa4093822u, 0x299f31d0u});
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("counter streams are deterministic and lane-addressable") {
    rng::CounterStream a(12345u, 7u);
    rng::CounterStream b(12345u, 7u);
    for (std::uint32_t step : {0u, 1u, 17u})
        for (std::uint32_t mode : {0u, 1u, 2u, 511u})
            CHECK(a.normal(step, mode) == b.normal(step, mode));

    double buf[5];
    a.fill_normals(3, buf, 5);
    for (std::uint32_t i = 0; i < 5; ++i) CHECK(buf[i] == a.normal(3, i));

    rng::CounterStream c(12345u, 8u);
    CHECK(a.normal(0, 0) != c.normal(0, 0));
}

TEST_CASE("normal moments over a large block") {
    const int n = 200000;
    rng::CounterStream s(99u, 0u);
    std::vector<double> xs(n);
    s.fill_normals(0, xs.data(), xs.size());
    const auto mv = par::mean_variance(xs);
    CHECK(std::abs(mv.mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(mv.variance - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gauss-legendre integrates polynomials to machine precision") {
    // order 8 is exact through degree 15, order 12 through degree 23
    const auto poly = [](int p) { return [p](double x) { return std::pow(x, p); }; };
    for (int p = 0; p <= 15; ++p) {
        const double exact = 1.0 / (p + 1);
        CHECK(quad::panel(poly(p), 0.0, 1.0, 8) == doctest::Approx(exact).epsilon(1e-14));
    }
    for (int p = 16; p <= 23; ++p) {
        const double exact = 1.0 / (p + 1);
        CHECK(quad::panel(poly(p), 0.0, 1.0, 12) == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("composite rule resolves oscillatory integrands") {
    const double w = 40.0 * std::numbers::pi;
    const double exact = (1.0 - std::cos(w)) / w;
    const double got = quad::composite([&](double x) { return std::sin(w * x); }, 0.0, 1.0, 80, 8);
    CHECK(got == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("kahan reduction is exact on adversarial order") {
    std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
    CHECK(par::kahan_sum(xs) == 2.0);
}
