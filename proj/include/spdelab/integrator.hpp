#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spdelab/dst.hpp"
#include "spdelab/fem.hpp"
#include "spdelab/model.hpp"
#include "spdelab/noise.hpp"

namespace spdelab::sde {

// Exponential Euler for the spectral Galerkin system in eigencoordinates:
//   x_i^{n+1} = exp(-lambda_i dt) (x_i^n + dt f_i(x^n) + (g(x^n) dW^n)_i).
// Nemytskii maps are evaluated by collocation on a 4x-oversampled sine grid;
// the same grid synthesizes the increment when the noise is multiplicative.
class SpectralEvolver {
public:
    SpectralEvolver(const ModelSpec& model, int modes, double dt);

    int modes() const { return m_; }
    double dt() const { return dt_; }
    Eigen::VectorXd initial_state() const;

    void step(Eigen::VectorXd& state, const Eigen::VectorXd& increment_coords);

    // Nemytskii drift in spectral coordinates (grid collocation), exposed for
    // the operation-level API and its oracle tests.
    Eigen::VectorXd nemytskii_drift(const Eigen::VectorXd& state);

private:
    const ModelSpec* model_;
    int m_;
    double dt_;
    Eigen::VectorXd decay_;  // exp(-lambda_i dt)
    dst::SineTransform grid_;
    std::vector<double> u_vals_, w_vals_, rhs_vals_;
    Eigen::VectorXd rhs_coords_;
};

// Time stepping for the finite element system driven by embedded increments.
// Exponential Euler advances eigencoordinates with the exact S_h(dt);
// semi-implicit Euler solves (M + dt K) c' = M c + dt M f(c) + load.
class FemEvolver {
public:
    FemEvolver(const ModelSpec& model, const noise::FemEmbedding& embedding,
               const StepScheme& scheme);

    const fem::FemSpace& space() const { return *space_; }
    const StepScheme& scheme() const { return scheme_; }

    Eigen::VectorXd initial_nodal() const;  // P_h X_0
    Eigen::VectorXd initial_state() const;  // representation depends on scheme
    void step(Eigen::VectorXd& state, const Eigen::VectorXd& increment_coords);
    Eigen::VectorXd terminal_nodal(const Eigen::VectorXd& state) const;

private:
    const ModelSpec* model_;
    const fem::FemSpace* space_;
    const noise::FemEmbedding* embedding_;
    StepScheme scheme_;
    Eigen::VectorXd decay_;      // exp(-lambda_i^h dt) for the exponential scheme
    fem::TridiagSPD shifted_;    // M + dt K for the semi-implicit scheme
    Eigen::VectorXd nodal_buf_, eig_buf_, noise_buf_;
};

// Operation-level API used by the tests; wrappers over the evolvers.
Eigen::VectorXd eval_nemytskii_fem(const ModelSpec& model, const fem::FemFunction& state);
spectral::SpectralVector eval_nemytskii_spectral(const ModelSpec& model,
                                                 const spectral::SpectralVector& state);

fem::FemFunction step_fem(const fem::FemFunction& state, const ModelSpec& model,
                          const StepScheme& scheme, const noise::WienerIncrement& inc,
                          const noise::FemEmbedding& embedding);
spectral::SpectralVector step_spectral(const spectral::SpectralVector& state,
                                       const ModelSpec& model, const StepScheme& scheme,
                                       const noise::WienerIncrement& inc);

fem::FemFunction evolve_fem(const ModelSpec& model, const StepScheme& scheme,
                            const noise::FemEmbedding& embedding,
                            const std::vector<noise::WienerIncrement>& path);
spectral::SpectralVector evolve_spectral(const ModelSpec& model, const StepScheme& scheme,
                                         int modes,
                                         const std::vector<noise::WienerIncrement>& path);

}  // namespace spdelab::sde
