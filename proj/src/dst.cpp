#include "spdelab/dst.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace spdelab::dst {

namespace {
std::mutex plan_mutex;  // FFTW planning is not thread-safe; execution is.
}

SineTransform::SineTransform(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("SineTransform: size must be >= 1");
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan_ = fftw_plan_r2r_1d(n, in_, out_, FFTW_RODFT00, FFTW_ESTIMATE);
    if (!plan_) throw std::runtime_error("SineTransform: fftw plan failed");
}

SineTransform::~SineTransform() {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(in_);
    fftw_free(out_);
}

double SineTransform::grid_point(int k) const { return double(k + 1) / (n_ + 1); }

void SineTransform::synthesize(std::span<const double> coeffs, std::span<double> values) {
    // RODFT00: out_k = 2 sum_j in_j sin(pi j k / (n+1)); in_j = c_j / sqrt(2)
    // makes out the sqrt(2)-normalized sine synthesis.
    const int m = std::min<int>(n_, static_cast<int>(coeffs.size()));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < m; ++j) in_[j] = coeffs[j] * inv_sqrt2;
    std::fill(in_ + m, in_ + n_, 0.0);
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), in_, out_);
    for (int k = 0; k < n_; ++k) values[k] = out_[k];
}

void SineTransform::analyze(std::span<const double> values, std::span<double> coeffs) {
    std::copy(values.begin(), values.begin() + n_, in_);
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), in_, out_);
    const double scale = 1.0 / (std::sqrt(2.0) * (n_ + 1));
    const int m = std::min<int>(n_, static_cast<int>(coeffs.size()));
    for (int i = 0; i < m; ++i) coeffs[i] = out_[i] * scale;
}

}  // namespace spdelab::dst
