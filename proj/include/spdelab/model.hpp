#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "spdelab/spectral.hpp"

namespace spdelab::sde {

// Nemytskii drift u(x) -> F(u(x)).
enum class DriftKind { zero, sine, ratio, linear };

inline double drift_value(DriftKind kind, double a, double v) {
    switch (kind) {
        case DriftKind::zero: return 0.0;
        case DriftKind::sine: return std::sin(v);
        case DriftKind::ratio: return v / (1.0 + v * v);
        case DriftKind::linear: return a * v;
    }
    return 0.0;
}

// Diffusion: additive g = I, or Nemytskii multiplicative g(u)v = G(u)*v.
enum class DiffusionKind { zero, additive, mult_sine, mult_inv_sqrt };

inline double diffusion_factor(DiffusionKind kind, double v) {
    switch (kind) {
        case DiffusionKind::zero: return 0.0;
        case DiffusionKind::additive: return 1.0;
        case DiffusionKind::mult_sine: return std::sin(v);
        case DiffusionKind::mult_inv_sqrt: return 1.0 / std::sqrt(1.0 + v * v);
    }
    return 0.0;
}

std::string drift_name(DriftKind k);
std::string diffusion_name(DiffusionKind k);

// Deterministic initial value with an exact sine-coefficient expansion:
//   zero, a single eigenmode, or a*x(1-x).
struct InitialValue {
    enum class Kind { zero, mode, parabola };
    Kind kind = Kind::zero;
    int mode = 1;
    double amplitude = 1.0;

    static InitialValue zero() { return {Kind::zero, 1, 0.0}; }
    static InitialValue eigenmode(int mode, double amplitude) {
        return {Kind::mode, mode, amplitude};
    }
    static InitialValue parabola(double amplitude) { return {Kind::parabola, 1, amplitude}; }

    spectral::SpectralVector spectral_coeffs(int modes) const;
    std::string describe() const;
};

// The semilinear model: pairing of diffusion type with covariance follows the
// two noise regimes (additive needs a trace-class Q; Nemytskii multiplicative
// needs white noise in d = 1). The constructor enforces the pairing.
struct ModelSpec {
    DriftKind drift = DriftKind::zero;
    double drift_a = 0.0;  // coefficient for linear drift
    DiffusionKind diffusion = DiffusionKind::zero;
    spectral::CovarianceSpec covariance = spectral::CovarianceSpec::white();
    InitialValue x0;
    double final_time = 1.0;

    ModelSpec(DriftKind f, double a, DiffusionKind g, spectral::CovarianceSpec q,
              InitialValue init, double T)
        : drift(f), drift_a(a), diffusion(g), covariance(std::move(q)), x0(init), final_time(T) {
        if (T <= 0.0) throw std::invalid_argument("ModelSpec: final time must be > 0");
        if (diffusion == DiffusionKind::additive && !covariance.trace_class())
            throw std::invalid_argument(
                "ModelSpec: additive noise requires a trace-class covariance");
        if ((diffusion == DiffusionKind::mult_sine || diffusion == DiffusionKind::mult_inv_sqrt) &&
            covariance.kind() != spectral::CovarianceSpec::Kind::white)
            throw std::invalid_argument(
                "ModelSpec: Nemytskii multiplicative noise requires white covariance");
    }

    bool deterministic() const { return diffusion == DiffusionKind::zero; }
};

enum class SchemeKind { semi_implicit, exponential };

struct StepScheme {
    SchemeKind kind = SchemeKind::exponential;
    double dt = 0.0;

    StepScheme(SchemeKind k, double dt_, double final_time) : kind(k), dt(dt_) {
        if (dt_ <= 0.0) throw std::invalid_argument("StepScheme: dt must be > 0");
        const double n = final_time / dt_;
        if (std::abs(n - std::llround(n)) > 1e-9)
            throw std::invalid_argument("StepScheme: dt must divide the final time");
    }
    int steps(double final_time) const { return static_cast<int>(std::llround(final_time / dt)); }
};

}  // namespace spdelab::sde
