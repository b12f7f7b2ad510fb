#pragma once

#include <span>

namespace spdelab::dst {

// DST-I of logical size n (FFTW RODFT00), mapping sine-basis coordinates to
// values on the uniform grid x_k = k/(n+1), k = 1..n, and back. The grid
// quadrature is exact for trigonometric content up to mode n, so analysis
// after a pointwise nonlinearity is the usual collocation approximation.
class SineTransform {
public:
    explicit SineTransform(int n);
    ~SineTransform();
    SineTransform(const SineTransform&) = delete;
    SineTransform& operator=(const SineTransform&) = delete;

    int size() const { return n_; }
    double grid_point(int k) const;  // k = 0..n-1 -> (k+1)/(n+1)

    // values[k] = sum_i coeffs[i-1] * sqrt(2) sin(i pi x_k); zero-pads past n.
    void synthesize(std::span<const double> coeffs, std::span<double> values);
    // coeffs[i-1] = <values as function, phi_i> under exact grid quadrature.
    void analyze(std::span<const double> values, std::span<double> coeffs);

private:
    int n_;
    void* plan_;  // fftw_plan
    double* in_;
    double* out_;
};

}  // namespace spdelab::dst
