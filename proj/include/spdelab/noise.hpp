#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spdelab/fem.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab::noise {

// Truncated Q-Wiener process: K leading eigenmodes of A, covariance Q
// diagonal in that basis, all randomness addressed by counter streams.
struct WienerConfig {
    int truncation;                     // K
    spectral::CovarianceSpec covariance;
    std::uint64_t seed;
};

// One increment W(t+dt) - W(t) in spectral coordinates: coords[i-1] ~ N(0, q_i dt).
struct WienerIncrement {
    double dt;
    Eigen::VectorXd coords;
};

// Draws the increment for a given step index from the per-sample stream.
WienerIncrement sample_increment(const WienerConfig& config, double dt,
                                 const rng::CounterStream& stream, std::uint32_t step);

// P_h applied to the increment: precomputes the sine-hat load matrix once so
// the per-step work is a single matvec. `eigen` composes with W^T so that
// exponential-Euler steps need no mass solve at all.
class FemEmbedding {
public:
    FemEmbedding(const fem::FemSpace& space, int truncation);

    const fem::FemSpace& space() const { return *space_; }
    int truncation() const { return static_cast<int>(load_matrix_.cols()); }

    Eigen::VectorXd load(const Eigen::VectorXd& coords) const;        // B xi
    Eigen::VectorXd nodal(const Eigen::VectorXd& coords) const;       // M^{-1} B xi
    Eigen::VectorXd eigen(const Eigen::VectorXd& coords) const;       // W^T B xi
    const Eigen::MatrixXd& load_matrix() const { return load_matrix_; }

private:
    const fem::FemSpace* space_;
    Eigen::MatrixXd load_matrix_;    // N_h x K, entries <phi_i, chi_j>
    Eigen::MatrixXd eigen_matrix_;   // N_h x K, W^T B
};

fem::FemFunction embed_in_fem(const WienerIncrement& inc, const FemEmbedding& embedding);

// Statistical check of E |int Phi dW|^2 against the closed-form
// Hilbert-Schmidt integral, for the two deterministic integrands used in the
// experiments. `analytic` is the continuous-time value; `discrete_mean` is
// the exact expectation of the discretized sum (their gap is the quadrature
// bias, reported so the z-test's validity can be audited).
enum class ItoIntegrand { zero, identity, heat_kernel };

struct ItoReport {
    double empirical;
    double analytic;
    double discrete_mean;
    double stderr_;
    double z;
    int samples;
    bool pass;  // |z| < 4
};

ItoReport ito_isometry_check(const WienerConfig& config, ItoIntegrand integrand, double T,
                             double dt, int samples, int threads = 1);

// Closed-form second moments for the two integrands (termwise scalar integrals).
double ito_analytic_value(const WienerConfig& config, ItoIntegrand integrand, double T);
double ito_discrete_mean(const WienerConfig& config, ItoIntegrand integrand, double T, double dt);

}  // namespace spdelab::noise
