#include "spdelab/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "spdelab/parallel.hpp"

namespace spdelab::noise {

using spectral::eigenvalue;

WienerIncrement sample_increment(const WienerConfig& config, double dt,
                                 const rng::CounterStream& stream, std::uint32_t step) {
    if (dt <= 0.0) throw std::invalid_argument("sample_increment: dt must be > 0");
    const int K = config.truncation;
    WienerIncrement inc{dt, Eigen::VectorXd(K)};
    stream.fill_normals(step, inc.coords.data(), static_cast<std::size_t>(K));
    for (int i = 1; i <= K; ++i)
        inc.coords(i - 1) *= std::sqrt(config.covariance.mode_variance(i) * dt);
    return inc;
}

FemEmbedding::FemEmbedding(const fem::FemSpace& space, int truncation) : space_(&space) {
    if (truncation < space.dim())
        throw std::invalid_argument("FemEmbedding: truncation below N_h breaks coupling");
    load_matrix_ = fem::sine_load_matrix(space, truncation).transpose();  // N_h x K
    eigen_matrix_ = space.eigenvectors().transpose() * load_matrix_;
}

Eigen::VectorXd FemEmbedding::load(const Eigen::VectorXd& coords) const {
    return load_matrix_ * coords;
}

Eigen::VectorXd FemEmbedding::nodal(const Eigen::VectorXd& coords) const {
    return space_->mass_solve(load_matrix_ * coords);
}

Eigen::VectorXd FemEmbedding::eigen(const Eigen::VectorXd& coords) const {
    return eigen_matrix_ * coords;
}

fem::FemFunction embed_in_fem(const WienerIncrement& inc, const FemEmbedding& embedding) {
    return fem::FemFunction(embedding.space(), embedding.nodal(inc.coords));
}

double ito_analytic_value(const WienerConfig& config, ItoIntegrand integrand, double T) {
    if (integrand == ItoIntegrand::zero) return 0.0;
    double s = 0.0;
    for (int i = 1; i <= config.truncation; ++i) {
        const double q = config.covariance.mode_variance(i);
        if (integrand == ItoIntegrand::identity) {
            s += q * T;
        } else {
            const double lam = eigenvalue(i);
            s += q * (1.0 - std::exp(-2.0 * lam * T)) / (2.0 * lam);
        }
    }
    return s;
}

double ito_discrete_mean(const WienerConfig& config, ItoIntegrand integrand, double T, double dt) {
    if (integrand != ItoIntegrand::heat_kernel) return ito_analytic_value(config, integrand, T);
    // left-endpoint sum: dt * sum_n exp(-2 lam (T - t_n)) in closed form
    double s = 0.0;
    for (int i = 1; i <= config.truncation; ++i) {
        const double lam = eigenvalue(i);
        const double q = config.covariance.mode_variance(i);
        s += q * dt * (1.0 - std::exp(-2.0 * lam * T)) / std::expm1(2.0 * lam * dt);
    }
    return s;
}

ItoReport ito_isometry_check(const WienerConfig& config, ItoIntegrand integrand, double T,
                             double dt, int samples, int threads) {
    if (T <= 0.0 || dt <= 0.0) throw std::invalid_argument("ito_isometry_check: T, dt must be > 0");
    const int steps = static_cast<int>(std::llround(T / dt));
    if (std::abs(steps * dt - T) > 1e-9 * T)
        throw std::invalid_argument("ito_isometry_check: dt must divide T");
    const int K = config.truncation;

    Eigen::VectorXd scale(K);
    for (int i = 1; i <= K; ++i)
        scale(i - 1) = std::sqrt(config.covariance.mode_variance(i) * dt);

    std::vector<double> sq(samples);
    par::parallel_for(samples, threads, [&](int s) {
        rng::CounterStream stream(config.seed, static_cast<std::uint64_t>(s));
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(K);
        Eigen::VectorXd z(K);
        for (int n = 0; n < steps; ++n) {
            stream.fill_normals(static_cast<std::uint32_t>(n), z.data(), K);
            if (integrand == ItoIntegrand::zero) {
                // nothing accumulates; the draws still exercise the stream
            } else if (integrand == ItoIntegrand::identity) {
                acc.array() += z.array() * scale.array();
            } else {
                const double t = n * dt;
                for (int i = 1; i <= K; ++i)
                    acc(i - 1) += std::exp(-eigenvalue(i) * (T - t)) * scale(i - 1) * z(i - 1);
            }
        }
        sq[s] = acc.squaredNorm();
    });

    const auto mv = par::mean_variance(sq);
    const double analytic = ito_analytic_value(config, integrand, T);
    const double se = std::sqrt(mv.variance / samples);
    const double diff = mv.mean - analytic;
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(1e300, diff));
    return {mv.mean, analytic, ito_discrete_mean(config, integrand, T, dt),
            se, z, samples, std::abs(z) < 4.0};
}

}  // namespace spdelab::noise
