#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spdelab/spectral.hpp"

namespace spdelab::fem {

// Partition of [0,1] with both endpoints; rejects non-monotone node lists and
// meshes whose h_max/h_min ratio exceeds the quasi-uniformity bound.
class Mesh1D {
public:
    explicit Mesh1D(std::vector<double> nodes, double quasi_uniformity_bound = 2.0);
    static Mesh1D uniform(int cells);

    int cells() const { return static_cast<int>(nodes_.size()) - 1; }
    int interior_nodes() const { return cells() - 1; }
    double node(int j) const { return nodes_[j]; }  // j = 0..cells
    double h_max() const { return h_max_; }
    double h_min() const { return h_min_; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
    double h_max_ = 0.0;
    double h_min_ = 0.0;
};

// LDL^T factorization of an SPD tridiagonal matrix.
struct TridiagSPD {
    Eigen::VectorXd d;
    Eigen::VectorXd l;
    void factor(const Eigen::VectorXd& diag, const Eigen::VectorXd& off);
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    void solve_in_place(Eigen::VectorXd& b) const;
};

// P1 space with homogeneous Dirichlet conditions: tridiagonal mass M and
// stiffness K from closed-form hat-function integrals, plus the dense
// M-orthonormal eigenpairs of the generalized problem K w = lambda M w.
// Everything downstream (discrete semigroup, fractional powers of A_h)
// rides on that eigendecomposition, so it is exact up to the eigensolve.
class FemSpace {
public:
    explicit FemSpace(Mesh1D mesh);

    const Mesh1D& mesh() const { return mesh_; }
    int dim() const { return n_; }  // N_h, number of interior nodes

    // Tridiagonal matrix data (diag length N_h, off length N_h-1).
    const Eigen::VectorXd& mass_diag() const { return mass_diag_; }
    const Eigen::VectorXd& mass_off() const { return mass_off_; }
    const Eigen::VectorXd& stiff_diag() const { return stiff_diag_; }
    const Eigen::VectorXd& stiff_off() const { return stiff_off_; }

    Eigen::VectorXd mass_apply(const Eigen::VectorXd& c) const;
    Eigen::VectorXd stiff_apply(const Eigen::VectorXd& c) const;
    Eigen::VectorXd mass_solve(const Eigen::VectorXd& b) const;
    Eigen::VectorXd stiff_solve(const Eigen::VectorXd& b) const;
    // (M + dt K) x = b for the semi-implicit step.
    Eigen::VectorXd shifted_solve(double dt, const Eigen::VectorXd& b) const;

    // Discrete eigenpairs, ascending; eigenvectors() columns are M-orthonormal.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

    Eigen::VectorXd to_eigen_coords(const Eigen::VectorXd& nodal) const;    // W^T M c
    Eigen::VectorXd from_eigen_coords(const Eigen::VectorXd& coords) const; // W y

    double node_x(int j) const { return mesh_.node(j + 1); }  // interior node j = 0..N_h-1

private:
    Mesh1D mesh_;
    int n_;
    Eigen::VectorXd mass_diag_, mass_off_, stiff_diag_, stiff_off_;
    TridiagSPD mass_factor_, stiff_factor_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

FemSpace assemble(Mesh1D mesh);

// Piecewise-linear function given by interior nodal values (zero on the boundary).
class FemFunction {
public:
    FemFunction(const FemSpace& space, Eigen::VectorXd coeffs);

    const FemSpace& space() const { return *space_; }
    const Eigen::VectorXd& coeffs() const { return c_; }
    Eigen::VectorXd& coeffs() { return c_; }

    double l2_norm() const;       // sqrt(c^T M c)
    double h1_seminorm() const;   // sqrt(c^T K c) = |A_h^{1/2} v|
    double evaluate(double x) const;

private:
    const FemSpace* space_;
    Eigen::VectorXd c_;
};

// <sqrt(2) sin(mode pi x), hat_j> in closed form (exact antiderivatives).
double sine_hat_product(int mode, const Mesh1D& mesh, int interior_j);

// Rows = modes 1..modes, columns = interior nodes: S(i,j) = <phi_i, chi_j>.
Eigen::MatrixXd sine_load_matrix(const FemSpace& space, int modes);

// Load vectors b_j = <f, chi_j>.
Eigen::VectorXd load_from_spectral(const FemSpace& space, const spectral::SpectralVector& u);
Eigen::VectorXd load_from_spectral_A(const FemSpace& space, const spectral::SpectralVector& u);  // <A u, chi_j>
Eigen::VectorXd load_constant(const FemSpace& space, double value);  // exact
Eigen::VectorXd load_from_function(const FemSpace& space, const std::function<double(double)>& f,
                                   int quad_order);

// L2-orthogonal projection P_h: solve M c = b.
FemFunction l2_project(const FemSpace& space, const spectral::SpectralVector& u);
FemFunction l2_project(const FemSpace& space, const std::function<double(double)>& f, int quad_order);
FemFunction l2_project(const FemSpace& space, const FemFunction& v);  // same-space fixed point

// Ritz (energy) projection R_h: solve K c = <A u, chi_j>.
FemFunction ritz_project(const FemSpace& space, const spectral::SpectralVector& u);
FemFunction ritz_project(const FemSpace& space, const FemFunction& v);  // same-space fixed point

// Discrete elliptic solve A_h^{-1} P_h f: K c = <f, chi_j>.
FemFunction elliptic_solve(const FemSpace& space, const Eigen::VectorXd& load);
FemFunction elliptic_solve(const FemSpace& space, const spectral::SpectralVector& f);

// A_h^gamma via the discrete eigenbasis.
FemFunction apply_Ah_power(double gamma, const FemFunction& v);

// Exact discrete semigroup S_h(t). Rejects t < 0.
FemFunction semigroup_apply_h(double t, const FemFunction& v);

// Coordinates <v_h, phi_i> for i = 1..modes (closed-form products).
spectral::SpectralVector expand_in_modes(const FemFunction& v, int modes);

// |A^gamma v_h| estimated through a truncated spectral expansion of v_h.
double continuous_power_norm(const FemFunction& v, double gamma, int modes);

// Nodal interpolation onto a nested refinement (exact for P1 when meshes nest).
FemFunction prolong_uniform(const FemFunction& v, const FemSpace& finer);

}  // namespace spdelab::fem
