#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/integrator.hpp"
#include "spdelab/model.hpp"

namespace spdelab::lab {

// Test functionals with globally bounded first and second derivatives:
//   gauss      : v -> exp(-|v|^2)        |phi|_C1 <= sqrt(2/e), |phi|_C2 <= 2
//   cosine(w)  : v -> cos<v, w>          |phi|_C1 <= |w|,       |phi|_C2 <= |w|^2
struct TestFunction {
    enum class Kind { gauss, cosine };
    Kind kind = Kind::gauss;
    spectral::SpectralVector w;  // cosine profile; default phi_1

    static TestFunction gauss() { return {Kind::gauss, spectral::SpectralVector::unit(1, 1)}; }
    static TestFunction cosine() { return {Kind::cosine, spectral::SpectralVector::unit(1, 1)}; }
    static TestFunction cosine_profile(spectral::SpectralVector profile) {
        return {Kind::cosine, std::move(profile)};
    }

    double cb1_bound() const;
    double cb2_bound() const;
    std::string name() const { return kind == Kind::gauss ? "gauss" : "cosine"; }
};

struct ReferenceSpec {
    enum class Kind { spectral, fem };
    Kind kind = Kind::spectral;
    int modes = 512;        // spectral reference
    int mesh_exponent = 9;  // fem reference on the uniform 2^-k mesh

    static ReferenceSpec spectral_modes(int m) { return {Kind::spectral, m, 0}; }
    static ReferenceSpec fem_mesh(int exponent) { return {Kind::fem, 0, exponent}; }
    std::string describe() const;
};

// A full rate experiment: model, mesh ladder h = 2^-k, reference, step size,
// Monte Carlo size, and the functionals for weak errors.
struct ExperimentPlan {
    sde::ModelSpec model;
    std::vector<int> ladder;  // exponents k, strictly increasing (refining)
    ReferenceSpec reference;
    double dt = 1e-3;
    int samples = 100;
    std::uint64_t seed = 0;
    std::vector<TestFunction> test_functions;
    int truncation = 0;  // 0 -> max(512, 4 * finest N_h)
    int threads = 1;
    sde::SchemeKind scheme = sde::SchemeKind::exponential;

    void validate() const;
    int effective_truncation() const;
    int finest_interior_nodes() const;
};

struct LevelResult {
    double h;
    double error;
    double stderr_;
};

// Least squares for log(error) = slope * log(h) + intercept, with a
// t-distribution confidence interval from the residual variance.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double se = 0.0;
    int n = 0;
};

RateFit fit_rate(std::span<const std::pair<double, double>> h_and_error);
RateFit fit_rate(std::span<const LevelResult> levels);

// dt-saturation: the same experiment at dt/2 must move every reported error
// by less than 10% (or less than the combined Monte Carlo noise).
struct SaturationInfo {
    bool saturated = true;
    double max_rel_change = 0.0;
    std::vector<LevelResult> half_dt_levels;
};

struct ConvergenceReport {
    std::vector<LevelResult> levels;
    RateFit fit;
    SaturationInfo saturation;
    double reference_floor = 0.0;       // estimated reference truncation error
    double tail_variance_bound = 0.0;   // noise truncation bias (variance units)
    double dt = 0.0;
    int samples = 0;
    int truncation = 0;
    std::uint64_t seed = 0;
};

struct WeakReport {
    struct PerFunction {
        std::string name;
        std::vector<LevelResult> levels;
        RateFit fit;
        SaturationInfo saturation;
    };
    std::vector<PerFunction> functions;
    ConvergenceReport strong;  // same trajectories, used for diagnostics
};

// Coupled Monte Carlo estimates of (E|X_ref(T)-X_h(T)|^2)^{1/2} per ladder
// level, identical increments driving reference and every level.
ConvergenceReport strong_error(const ExperimentPlan& plan);

// Coupled estimates of |E[phi(X_ref(T)) - phi(X_h(T))]| per functional.
WeakReport weak_error(const ExperimentPlan& plan);

// Deterministic certifications of the projection, smoothing, and norm
// equivalence inequalities on a mesh ladder.
struct OperatorCheck {
    std::string family;  // inequality family the check certifies
    std::string name;
    std::string kind;  // "rate" | "bound" | "ratio" | "exact"
    std::vector<std::pair<double, double>> measured;  // (h or t, value)
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct OperatorCheckReport {
    std::vector<OperatorCheck> checks;
    bool all_pass = false;
};

OperatorCheckReport operator_checks(const std::vector<int>& ladder_exponents, int mode_budget,
                                    std::uint64_t seed);

// Unbiasedness anchor: on the linear-drift additive model both discretized
// laws are Gaussian, so E cos<X(T), w> has a closed form for the reference
// and the finite element solution alike. The coupled estimator must land
// within 4 Monte Carlo standard errors of the exact difference.
struct AnchorConfig {
    double drift_a = 0.5;
    double covariance_s = 1.0;  // Q = A^{-s}
    double T = 0.25;
    double dt = 2.5e-3;
    int ref_modes = 64;
    int mesh_exponent = 4;
    int samples = 20000;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct AnchorReport {
    double exact_ref = 0.0;
    double exact_fem = 0.0;
    double exact_diff = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double deviation_sigmas = 0.0;
    bool pass = false;
};

AnchorReport estimator_anchor(const AnchorConfig& config);

// Closed-form Gaussian weak values used by the anchor (exposed so the tests
// can cross-check them against an independent scalar recursion).
struct AnchorExact {
    double ref_expectation;
    double fem_expectation;
};
AnchorExact anchor_exact_expectations(const AnchorConfig& config);

}  // namespace spdelab::lab
