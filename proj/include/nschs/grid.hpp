#pragma once

// Uniform cell-centered grid on a rectangle with homogeneous Neumann ghost
// rules for scalars and MAC staggering for the velocity. All discrete
// operators are second-order centered stencils; constant-coefficient
// implicit solves diagonalize in the cosine basis (see spectral.hpp).

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nschs {

struct Grid2D {
    int nx = 0;
    int ny = 0;
    double Lx = 1.0;
    double Ly = 1.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double Lx_, double Ly_);

    double hx() const { return Lx / nx; }
    double hy() const { return Ly / ny; }
    double cell_area() const { return hx() * hy(); }
    double area() const { return Lx * Ly; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    double x_center(int i) const { return (i + 0.5) * hx(); }
    double y_center(int j) const { return (j + 0.5) * hy(); }

    bool operator==(const Grid2D& o) const = default;
};

/// Cell-centered scalar, row-major with x fastest: value(i, j) = data[j*nx + i].
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0)
        : grid_(g), v_(g.size(), fill) {}

    const Grid2D& grid() const { return grid_; }
    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    std::size_t size() const { return v_.size(); }

private:
    Grid2D grid_;
    std::vector<double> v_;
};

/// Staggered velocity: ux on vertical faces (nx+1 per row), uy on horizontal
/// faces (ny+1 rows). Boundary-normal faces hold 0 under no-slip.
class MACField {
public:
    MACField() = default;
    explicit MACField(const Grid2D& g)
        : grid_(g),
          ux_(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
          uy_(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0) {}

    const Grid2D& grid() const { return grid_; }
    double& ux(int i, int j) { return ux_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }
    double ux(int i, int j) const { return ux_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }
    double& uy(int i, int j) { return uy_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    double uy(int i, int j) const { return uy_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    std::vector<double>& ux_data() { return ux_; }
    const std::vector<double>& ux_data() const { return ux_; }
    std::vector<double>& uy_data() { return uy_; }
    const std::vector<double>& uy_data() const { return uy_; }

    /// Zeroes the boundary-normal faces (the no-slip contract).
    void enforce_no_slip();
    double max_abs() const;

private:
    Grid2D grid_;
    std::vector<double> ux_;
    std::vector<double> uy_;
};

double mean(const ScalarField& f);

/// Face gradient with zero boundary-normal entries (Neumann reflection).
MACField gradient(const ScalarField& f);
/// Cell divergence of a face field; uses the boundary faces as stored.
ScalarField divergence(const MACField& v);
/// Five-point Laplacian with reflection ghosts (= divergence o gradient).
ScalarField laplacian(const ScalarField& f);
/// div(q_face grad f) with q averaged from cells to faces and zero
/// boundary-normal flux; the adjoint structure matches the discrete energy.
ScalarField div_scaled_gradient(const ScalarField& q, const ScalarField& f);
/// Composites re-applying ghost rules, so d_n(Delta f) = 0 is built in.
ScalarField biharmonic(const ScalarField& f);
ScalarField triharmonic(const ScalarField& f);

struct HelmholtzCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Solves (a I + b Lap + c Lap^2 + d Lap^3) f = rhs by cosine diagonalization.
/// When a == 0 the result is normalized to zero mean and rhs must be
/// mean-free; a vanishing symbol on any other mode is an error naming it.
ScalarField helmholtz_solve(const HelmholtzCoeffs& coeffs, const ScalarField& rhs);

/// u = N f with -Lap u = f, mean(u) = 0; requires mean(f) = 0 to 1e-10 ||f||.
ScalarField inv_neumann_laplacian(const ScalarField& f);

struct ScalarNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double v0_star = 0.0; // ||grad N (f - mean f)||
    double linf = 0.0;
};
ScalarNorms norms(const ScalarField& f);

struct MACNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};
MACNorms mac_norms(const MACField& v);

/// L2 pairing (f, g) = hx hy sum f g.
double inner(const ScalarField& f, const ScalarField& g);
/// Face-weighted pairing over both components.
double inner(const MACField& a, const MACField& b);

/// Keeps the n_modes cosine modes of smallest |eigenvalue| (ties broken
/// lexicographically on (kx, ky)); mode (0,0) is always kept.
ScalarField galerkin_project(const ScalarField& f, int n_modes);

/// Restriction to a coarser grid by cell averaging (factor must divide).
ScalarField restrict_to(const ScalarField& fine, const Grid2D& coarse);

} // namespace nschs
