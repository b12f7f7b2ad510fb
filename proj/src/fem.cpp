#include "spdelab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/quadrature.hpp"

namespace spdelab::fem {

using spectral::kPi;

Mesh1D::Mesh1D(std::vector<double> nodes, double quasi_uniformity_bound)
    : nodes_(std::move(nodes)) {
    if (nodes_.size() < 3)
        throw std::invalid_argument("Mesh1D: need at least one interior node");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        throw std::invalid_argument("Mesh1D: endpoints must be 0 and 1");
    h_max_ = 0.0;
    h_min_ = 1.0;
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
        const double h = nodes_[j] - nodes_[j - 1];
        if (h <= 0.0) throw std::invalid_argument("Mesh1D: nodes must be strictly increasing");
        h_max_ = std::max(h_max_, h);
        h_min_ = std::min(h_min_, h);
    }
    if (h_max_ / h_min_ > quasi_uniformity_bound * (1.0 + 1e-12))
        throw std::invalid_argument("Mesh1D: quasi-uniformity ratio exceeds bound");
}

Mesh1D Mesh1D::uniform(int cells) {
    if (cells < 2) throw std::invalid_argument("Mesh1D::uniform: need >= 2 cells");
    std::vector<double> nodes(cells + 1);
    for (int j = 0; j <= cells; ++j) nodes[j] = double(j) / cells;
    nodes.front() = 0.0;
    nodes.back() = 1.0;
    return Mesh1D(std::move(nodes));
}

void TridiagSPD::factor(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
    const int n = static_cast<int>(diag.size());
    d.resize(n);
    l.resize(n > 0 ? n - 1 : 0);
    d(0) = diag(0);
    for (int i = 1; i < n; ++i) {
        l(i - 1) = off(i - 1) / d(i - 1);
        d(i) = diag(i) - off(i - 1) * l(i - 1);
    }
}

Eigen::VectorXd TridiagSPD::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    solve_in_place(x);
    return x;
}

void TridiagSPD::solve_in_place(Eigen::VectorXd& x) const {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) x(i) -= l(i - 1) * x(i - 1);
    x(n - 1) /= d(n - 1);
    for (int i = n - 2; i >= 0; --i) x(i) = x(i) / d(i) - l(i) * x(i + 1);
}

FemSpace::FemSpace(Mesh1D mesh) : mesh_(std::move(mesh)), n_(mesh_.interior_nodes()) {
    // Closed-form P1 element integrals on each cell.
    mass_diag_.resize(n_);
    mass_off_.resize(n_ - 1);
    stiff_diag_.resize(n_);
    stiff_off_.resize(n_ - 1);
    for (int j = 0; j < n_; ++j) {
        const double hl = mesh_.node(j + 1) - mesh_.node(j);
        const double hr = mesh_.node(j + 2) - mesh_.node(j + 1);
        mass_diag_(j) = (hl + hr) / 3.0;
        stiff_diag_(j) = 1.0 / hl + 1.0 / hr;
        if (j + 1 < n_) {
            mass_off_(j) = hr / 6.0;
            stiff_off_(j) = -1.0 / hr;
        }
    }
    mass_factor_.factor(mass_diag_, mass_off_);
    stiff_factor_.factor(stiff_diag_, stiff_off_);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        M(j, j) = mass_diag_(j);
        K(j, j) = stiff_diag_(j);
        if (j + 1 < n_) {
            M(j, j + 1) = M(j + 1, j) = mass_off_(j);
            K(j, j + 1) = K(j + 1, j) = stiff_off_(j);
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M,
        Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("FemSpace: generalized eigensolve failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();  // columns satisfy W^T M W = I
}

FemSpace assemble(Mesh1D mesh) { return FemSpace(std::move(mesh)); }

Eigen::VectorXd FemSpace::mass_apply(const Eigen::VectorXd& c) const {
    Eigen::VectorXd out = mass_diag_.cwiseProduct(c);
    for (int i = 0; i + 1 < n_; ++i) {
        out(i) += mass_off_(i) * c(i + 1);
        out(i + 1) += mass_off_(i) * c(i);
    }
    return out;
}

Eigen::VectorXd FemSpace::stiff_apply(const Eigen::VectorXd& c) const {
    Eigen::VectorXd out = stiff_diag_.cwiseProduct(c);
    for (int i = 0; i + 1 < n_; ++i) {
        out(i) += stiff_off_(i) * c(i + 1);
        out(i + 1) += stiff_off_(i) * c(i);
    }
    return out;
}

Eigen::VectorXd FemSpace::mass_solve(const Eigen::VectorXd& b) const { return mass_factor_.solve(b); }
Eigen::VectorXd FemSpace::stiff_solve(const Eigen::VectorXd& b) const { return stiff_factor_.solve(b); }

Eigen::VectorXd FemSpace::shifted_solve(double dt, const Eigen::VectorXd& b) const {
    TridiagSPD f;
    f.factor(mass_diag_ + dt * stiff_diag_, mass_off_ + dt * stiff_off_);
    return f.solve(b);
}

Eigen::VectorXd FemSpace::to_eigen_coords(const Eigen::VectorXd& nodal) const {
    return eigenvectors_.transpose() * mass_apply(nodal);
}

Eigen::VectorXd FemSpace::from_eigen_coords(const Eigen::VectorXd& coords) const {
    return eigenvectors_ * coords;
}

FemFunction::FemFunction(const FemSpace& space, Eigen::VectorXd coeffs)
    : space_(&space), c_(std::move(coeffs)) {
    if (c_.size() != space.dim())
        throw std::invalid_argument("FemFunction: coefficient count != N_h");
}

double FemFunction::l2_norm() const { return std::sqrt(c_.dot(space_->mass_apply(c_))); }
double FemFunction::h1_seminorm() const { return std::sqrt(c_.dot(space_->stiff_apply(c_))); }

double FemFunction::evaluate(double x) const {
    const auto& nodes = space_->mesh().nodes();
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const int cell = static_cast<int>(it - nodes.begin()) - 1;  // x in [node cell, node cell+1)
    const double xl = nodes[cell], xr = nodes[cell + 1];
    const double t = (x - xl) / (xr - xl);
    const int n = space_->dim();
    const double vl = (cell - 1 >= 0 && cell - 1 < n) ? c_(cell - 1) : 0.0;
    const double vr = (cell >= 0 && cell < n) ? c_(cell) : 0.0;
    return vl * (1.0 - t) + vr * t;
}

namespace {
// int_a^c hat(x) sin(w x) dx for the hat rising on [a,b], falling on [b,c];
// the cosine terms cancel, leaving only sine differences.
double hat_sine_integral(double w, double a, double b, double c) {
    const double sa = std::sin(w * a), sb = std::sin(w * b), sc = std::sin(w * c);
    return ((sb - sa) / (b - a) - (sc - sb) / (c - b)) / (w * w);
}
}  // namespace

double sine_hat_product(int mode, const Mesh1D& mesh, int interior_j) {
    const double w = mode * kPi;
    const double a = mesh.node(interior_j);
    const double b = mesh.node(interior_j + 1);
    const double c = mesh.node(interior_j + 2);
    return std::sqrt(2.0) * hat_sine_integral(w, a, b, c);
}

Eigen::MatrixXd sine_load_matrix(const FemSpace& space, int modes) {
    Eigen::MatrixXd S(modes, space.dim());
    for (int i = 1; i <= modes; ++i)
        for (int j = 0; j < space.dim(); ++j)
            S(i - 1, j) = sine_hat_product(i, space.mesh(), j);
    return S;
}

Eigen::VectorXd load_from_spectral(const FemSpace& space, const spectral::SpectralVector& u) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dim());
    for (int i = 1; i <= u.modes(); ++i) {
        const double ci = u.coef(i);
        if (ci == 0.0) continue;
        for (int j = 0; j < space.dim(); ++j)
            b(j) += ci * sine_hat_product(i, space.mesh(), j);
    }
    return b;
}

Eigen::VectorXd load_from_spectral_A(const FemSpace& space, const spectral::SpectralVector& u) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dim());
    for (int i = 1; i <= u.modes(); ++i) {
        const double ci = u.coef(i) * spectral::eigenvalue(i);
        if (ci == 0.0) continue;
        for (int j = 0; j < space.dim(); ++j)
            b(j) += ci * sine_hat_product(i, space.mesh(), j);
    }
    return b;
}

Eigen::VectorXd load_constant(const FemSpace& space, double value) {
    Eigen::VectorXd b(space.dim());
    for (int j = 0; j < space.dim(); ++j)
        b(j) = 0.5 * value * (space.mesh().node(j + 2) - space.mesh().node(j));
    return b;
}

Eigen::VectorXd load_from_function(const FemSpace& space, const std::function<double(double)>& f,
                                   int quad_order) {
    Eigen::VectorXd b(space.dim());
    const auto& mesh = space.mesh();
    for (int j = 0; j < space.dim(); ++j) {
        const double a = mesh.node(j), m = mesh.node(j + 1), c = mesh.node(j + 2);
        const double up = quad::panel(
            [&](double x) { return f(x) * (x - a) / (m - a); }, a, m, quad_order);
        const double down = quad::panel(
            [&](double x) { return f(x) * (c - x) / (c - m); }, m, c, quad_order);
        b(j) = up + down;
    }
    return b;
}

FemFunction l2_project(const FemSpace& space, const spectral::SpectralVector& u) {
    return FemFunction(space, space.mass_solve(load_from_spectral(space, u)));
}

FemFunction l2_project(const FemSpace& space, const std::function<double(double)>& f,
                       int quad_order) {
    return FemFunction(space, space.mass_solve(load_from_function(space, f, quad_order)));
}

FemFunction l2_project(const FemSpace& space, const FemFunction& v) {
    if (&v.space() != &space)
        throw std::invalid_argument("l2_project: function lives in another space");
    return FemFunction(space, space.mass_solve(space.mass_apply(v.coeffs())));
}

FemFunction ritz_project(const FemSpace& space, const spectral::SpectralVector& u) {
    return FemFunction(space, space.stiff_solve(load_from_spectral_A(space, u)));
}

FemFunction ritz_project(const FemSpace& space, const FemFunction& v) {
    if (&v.space() != &space)
        throw std::invalid_argument("ritz_project: function lives in another space");
    return FemFunction(space, space.stiff_solve(space.stiff_apply(v.coeffs())));
}

FemFunction elliptic_solve(const FemSpace& space, const Eigen::VectorXd& load) {
    return FemFunction(space, space.stiff_solve(load));
}

FemFunction elliptic_solve(const FemSpace& space, const spectral::SpectralVector& f) {
    return elliptic_solve(space, load_from_spectral(space, f));
}

FemFunction apply_Ah_power(double gamma, const FemFunction& v) {
    const FemSpace& sp = v.space();
    Eigen::VectorXd y = sp.to_eigen_coords(v.coeffs());
    for (int i = 0; i < sp.dim(); ++i) y(i) *= std::pow(sp.eigenvalues()(i), gamma);
    return FemFunction(sp, sp.from_eigen_coords(y));
}

FemFunction semigroup_apply_h(double t, const FemFunction& v) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply_h: t must be >= 0");
    const FemSpace& sp = v.space();
    Eigen::VectorXd y = sp.to_eigen_coords(v.coeffs());
    for (int i = 0; i < sp.dim(); ++i) y(i) *= std::exp(-sp.eigenvalues()(i) * t);
    return FemFunction(sp, sp.from_eigen_coords(y));
}

spectral::SpectralVector expand_in_modes(const FemFunction& v, int modes) {
    std::vector<double> c(modes, 0.0);
    for (int i = 1; i <= modes; ++i) {
        double s = 0.0;
        for (int j = 0; j < v.space().dim(); ++j)
            s += v.coeffs()(j) * sine_hat_product(i, v.space().mesh(), j);
        c[i - 1] = s;
    }
    return spectral::SpectralVector(std::move(c));
}

double continuous_power_norm(const FemFunction& v, double gamma, int modes) {
    const auto c = expand_in_modes(v, modes);
    return c.hdot_norm(2.0 * gamma);
}

FemFunction prolong_uniform(const FemFunction& v, const FemSpace& finer) {
    const int coarse = v.space().mesh().cells();
    const int fine = finer.mesh().cells();
    if (fine % coarse != 0)
        throw std::invalid_argument("prolong_uniform: meshes do not nest");
    Eigen::VectorXd c(finer.dim());
    for (int j = 0; j < finer.dim(); ++j) c(j) = v.evaluate(finer.node_x(j));
    return FemFunction(finer, std::move(c));
}

}  // namespace spdelab::fem
