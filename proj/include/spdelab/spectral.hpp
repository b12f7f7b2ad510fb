#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace spdelab::spectral {

inline constexpr double kPi = std::numbers::pi;

// Dirichlet Laplacian on (0,1): eigenvalues (i*pi)^2 and L2-orthonormal
// eigenfunctions sqrt(2) sin(i*pi*x), i = 1, 2, ...
inline double eigenvalue(int mode) { return (mode * kPi) * (mode * kPi); }
inline double eigenfunction(int mode, double x) {
    return std::sqrt(2.0) * std::sin(mode * kPi * x);
}

// A function on (0,1) stored by its coordinates in the sine eigenbasis.
// The L2 norm is the Euclidean norm of the coordinates (Parseval); mixing
// vectors of different mode counts zero-pads the shorter one.
class SpectralVector {
public:
    SpectralVector() = default;
    explicit SpectralVector(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

    static SpectralVector zero(int modes) { return SpectralVector(std::vector<double>(modes, 0.0)); }
    static SpectralVector unit(int modes, int mode);

    int modes() const { return static_cast<int>(c_.size()); }
    double coef(int mode) const { return (mode >= 1 && mode <= modes()) ? c_[mode - 1] : 0.0; }
    double& coef_ref(int mode) { return c_[mode - 1]; }
    const std::vector<double>& data() const { return c_; }
    std::vector<double>& data() { return c_; }

    double norm() const;                       // L2 = Euclidean on coordinates
    double hdot_norm(double order) const;      // |A^{order/2} v| (Hdot^order)
    double evaluate(double x) const;           // pointwise synthesis

    SpectralVector& operator+=(const SpectralVector& other);
    SpectralVector& operator-=(const SpectralVector& other);
    SpectralVector& operator*=(double a);
    friend SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
    friend SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
    friend SpectralVector operator*(double a, SpectralVector v) { return v *= a; }

private:
    std::vector<double> c_;
};

double inner(const SpectralVector& a, const SpectralVector& b);

// A^gamma in eigencoordinates: coordinate i scaled by lambda_i^gamma.
SpectralVector apply_fractional(double gamma, const SpectralVector& v);

// Heat semigroup S(t): coordinate i scaled by exp(-lambda_i t). Rejects t < 0.
SpectralVector semigroup_apply(double t, const SpectralVector& v);

// Spectral projection P_m: zero out coordinates beyond m. Rejects m < 1.
SpectralVector spectral_project(int m, const SpectralVector& v);

// Covariance operator Q diagonal in the eigenbasis of A.
//   white       : q_i = 1
//   fractional  : Q = A^{-s}, q_i = lambda_i^{-s}
//   diagonal    : finitely many explicit q_i >= 0
class CovarianceSpec {
public:
    enum class Kind { white, fractional, diagonal };

    static CovarianceSpec white() { return CovarianceSpec(Kind::white, 0.0, {}); }
    static CovarianceSpec fractional(double s);
    static CovarianceSpec diagonal(std::vector<double> q);

    Kind kind() const { return kind_; }
    double exponent() const { return s_; }
    double mode_variance(int mode) const;
    // Analytic: trace sum_i q_i finite? (fractional: 2s > 1 in d = 1)
    bool trace_class() const;
    // Variance of the mild-solution tail sum_{i>K} q_i / (2 lambda_i); the
    // truncation-bias bound reported with every stochastic experiment.
    double tail_variance_bound(int truncation) const;
    std::string describe() const;

private:
    CovarianceSpec(Kind k, double s, std::vector<double> q)
        : kind_(k), s_(s), q_(std::move(q)) {}

    Kind kind_;
    double s_ = 0.0;
    std::vector<double> q_;
};

// Supremal beta <= 1 with sum_i lambda_i^(beta-1) q_i finite, found by
// bisection against a partial-sum convergence test: S_N at N = 2^10, 2^12,
// 2^14, declared convergent when |S_14 - S_12| < tol * (1 + S_14).
double regularity_beta(const CovarianceSpec& Q, double tolerance);

// The partial-sum convergence test itself, exposed for the oracle tests.
bool tail_converges(const CovarianceSpec& Q, double beta, double tolerance);

}  // namespace spdelab::spectral
