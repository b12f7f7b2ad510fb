#include "spdelab/spectral.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace spdelab::spectral {

SpectralVector SpectralVector::unit(int modes, int mode) {
    if (mode < 1 || mode > modes)
        throw std::invalid_argument("SpectralVector::unit: mode out of range");
    auto v = zero(modes);
    v.c_[mode - 1] = 1.0;
    return v;
}

double SpectralVector::norm() const {
    double s = 0.0;
    for (double x : c_) s += x * x;
    return std::sqrt(s);
}

double SpectralVector::hdot_norm(double order) const {
    double s = 0.0;
    for (int i = 1; i <= modes(); ++i) {
        const double x = c_[i - 1];
        s += std::pow(eigenvalue(i), order) * x * x;
    }
    return std::sqrt(s);
}

double SpectralVector::evaluate(double x) const {
    double s = 0.0;
    for (int i = 1; i <= modes(); ++i) s += c_[i - 1] * eigenfunction(i, x);
    return s;
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& other) {
    if (other.modes() > modes()) c_.resize(other.c_.size(), 0.0);
    for (int i = 0; i < other.modes(); ++i) c_[i] += other.c_[i];
    return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& other) {
    if (other.modes() > modes()) c_.resize(other.c_.size(), 0.0);
    for (int i = 0; i < other.modes(); ++i) c_[i] -= other.c_[i];
    return *this;
}

SpectralVector& SpectralVector::operator*=(double a) {
    for (double& x : c_) x *= a;
    return *this;
}

double inner(const SpectralVector& a, const SpectralVector& b) {
    const int n = std::min(a.modes(), b.modes());
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a.data()[i] * b.data()[i];
    return s;
}

SpectralVector apply_fractional(double gamma, const SpectralVector& v) {
    SpectralVector out = v;
    for (int i = 1; i <= v.modes(); ++i)
        out.data()[i - 1] *= std::pow(eigenvalue(i), gamma);
    return out;
}

SpectralVector semigroup_apply(double t, const SpectralVector& v) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    SpectralVector out = v;
    for (int i = 1; i <= v.modes(); ++i)
        out.data()[i - 1] *= std::exp(-eigenvalue(i) * t);
    return out;
}

SpectralVector spectral_project(int m, const SpectralVector& v) {
    if (m < 1) throw std::invalid_argument("spectral_project: m must be >= 1");
    SpectralVector out = v;
    for (int i = m; i < v.modes(); ++i) out.data()[i] = 0.0;
    return out;
}

CovarianceSpec CovarianceSpec::fractional(double s) {
    if (s < 0.0) throw std::invalid_argument("CovarianceSpec: fractional exponent must be >= 0");
    return CovarianceSpec(Kind::fractional, s, {});
}

CovarianceSpec CovarianceSpec::diagonal(std::vector<double> q) {
    for (double x : q)
        if (x < 0.0) throw std::invalid_argument("CovarianceSpec: diagonal entries must be >= 0");
    return CovarianceSpec(Kind::diagonal, 0.0, std::move(q));
}

double CovarianceSpec::mode_variance(int mode) const {
    switch (kind_) {
        case Kind::white: return 1.0;
        case Kind::fractional: return std::pow(eigenvalue(mode), -s_);
        case Kind::diagonal:
            return (mode >= 1 && mode <= static_cast<int>(q_.size())) ? q_[mode - 1] : 0.0;
    }
    return 0.0;
}

bool CovarianceSpec::trace_class() const {
    switch (kind_) {
        case Kind::white: return false;
        case Kind::fractional: return 2.0 * s_ > 1.0;
        case Kind::diagonal: return true;
    }
    return false;
}

double CovarianceSpec::tail_variance_bound(int truncation) const {
    if (kind_ == Kind::diagonal)
        return 0.0;  // finitely many modes, no tail once truncation covers them
    // sum_{i>K} q_i/(2 lambda_i): summed to 2^20, then integral bound on the rest.
    double s = 0.0;
    const int big = 1 << 20;
    for (int i = truncation + 1; i <= big; ++i)
        s += mode_variance(i) / (2.0 * eigenvalue(i));
    const double p = 2.0 + 2.0 * s_;  // term ~ (i pi)^(-p)
    s += std::pow(kPi, -p) * std::pow(double(big), 1.0 - p) / (p - 1.0);
    return s;
}

std::string CovarianceSpec::describe() const {
    switch (kind_) {
        case Kind::white: return "white";
        case Kind::fractional: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "fractional:%.6g", s_);
            return buf;
        }
        case Kind::diagonal: {
            std::string s = "diagonal:";
            for (std::size_t i = 0; i < q_.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%s%.6g", i ? "," : "", q_[i]);
                s += buf;
            }
            return s;
        }
    }
    return "?";
}

bool tail_converges(const CovarianceSpec& Q, double beta, double tolerance) {
    const int n1 = 1 << 12, n2 = 1 << 14;
    double s = 0.0, s12 = 0.0;
    for (int i = 1; i <= n2; ++i) {
        s += std::pow(eigenvalue(i), beta - 1.0) * Q.mode_variance(i);
        if (i == n1) s12 = s;
    }
    return std::abs(s - s12) < tolerance * (1.0 + s);
}

double regularity_beta(const CovarianceSpec& Q, double tolerance) {
    if (tolerance <= 0.0) throw std::invalid_argument("regularity_beta: tolerance must be > 0");
    if (Q.kind() == CovarianceSpec::Kind::diagonal) return 1.0;  // finite sum
    if (tail_converges(Q, 1.0, tolerance)) return 1.0;           // capped
    double lo = 0.0, hi = 1.0;  // converges at beta -> 0 for every supported Q
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (tail_converges(Q, mid, tolerance) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace spdelab::spectral
