#pragma once

#include <array>
#include <concepts>
#include <span>
#include <stdexcept>

namespace spdelab::quad {

// Gauss-Legendre nodes/weights on [-1,1]; orders 8 and 12 cover every
// integrand in this project (degree 15 / 23 polynomial exactness).
inline constexpr std::array<double, 8> kNodes8 = {
    -0.96028985649753623, -0.79666647741362674, -0.52553240991632899,
    -0.18343464249564980, 0.18343464249564980,  0.52553240991632899,
    0.79666647741362674,  0.96028985649753623};
inline constexpr std::array<double, 8> kWeights8 = {
    0.10122853629037626, 0.22238103445337447, 0.31370664587788729,
    0.36268378337836198, 0.36268378337836198, 0.31370664587788729,
    0.22238103445337447, 0.10122853629037626};

inline constexpr std::array<double, 12> kNodes12 = {
    -0.98156063424671925, -0.90411725637047486, -0.76990267419430469,
    -0.58731795428661745, -0.36783149899818019, -0.12523340851146891,
    0.12523340851146891,  0.36783149899818019,  0.58731795428661745,
    0.76990267419430469,  0.90411725637047486,  0.98156063424671925};
inline constexpr std::array<double, 12> kWeights12 = {
    0.04717533638651183, 0.10693932599531843, 0.16007832854334622,
    0.20316742672306592, 0.23349253653835481, 0.24914704581340279,
    0.24914704581340279, 0.23349253653835481, 0.20316742672306592,
    0.16007832854334622, 0.10693932599531843, 0.04717533638651183};

inline std::span<const double> nodes(int order) {
    if (order == 8) return kNodes8;
    if (order == 12) return kNodes12;
    throw std::invalid_argument("quad: only orders 8 and 12 are provided");
}

inline std::span<const double> weights(int order) {
    if (order == 8) return kWeights8;
    if (order == 12) return kWeights12;
    throw std::invalid_argument("quad: only orders 8 and 12 are provided");
}

template <std::invocable<double> F>
double panel(F&& f, double a, double b, int order) {
    const auto xs = nodes(order);
    const auto ws = weights(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) acc += ws[k] * f(mid + half * xs[k]);
    return acc * half;
}

// Composite rule with `panels` equal subintervals of [a,b].
template <std::invocable<double> F>
double composite(F&& f, double a, double b, int panels, int order) {
    if (panels < 1) throw std::invalid_argument("quad: panels must be >= 1");
    const double width = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p)
        acc += panel(f, a + p * width, a + (p + 1) * width, order);
    return acc;
}

}  // namespace spdelab::quad
