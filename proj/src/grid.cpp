#include "nschs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nschs/spectral.hpp"

namespace nschs {

Grid2D::Grid2D(int nx_, int ny_, double Lx_, double Ly_)
    : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
    if (nx < 4 || ny < 4)
        throw std::invalid_argument("Grid2D: nx, ny must be >= 4");
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw std::invalid_argument("Grid2D: Lx, Ly must be positive");
}

void MACField::enforce_no_slip() {
    for (int j = 0; j < grid_.ny; ++j) {
        ux(0, j) = 0.0;
        ux(grid_.nx, j) = 0.0;
    }
    for (int i = 0; i < grid_.nx; ++i) {
        uy(i, 0) = 0.0;
        uy(i, grid_.ny) = 0.0;
    }
}

double MACField::max_abs() const {
    double m = 0.0;
    for (double v : ux_) m = std::max(m, std::abs(v));
    for (double v : uy_) m = std::max(m, std::abs(v));
    return m;
}

double mean(const ScalarField& f) {
    // Kahan compensation keeps the mass diagnostics at the 1e-12 contract
    // even on fine grids; the fixed order keeps results bitwise stable.
    double sum = 0.0, carry = 0.0;
    for (double v : f.data()) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum * f.grid().cell_area() / f.grid().area();
}

MACField gradient(const ScalarField& f) {
    const Grid2D& g = f.grid();
    MACField out(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.ux(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.uy(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
    return out;
}

ScalarField divergence(const MACField& v) {
    const Grid2D& g = v.grid();
    ScalarField out(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = (v.ux(i + 1, j) - v.ux(i, j)) * ihx +
                        (v.uy(i, j + 1) - v.uy(i, j)) * ihy;
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const Grid2D& g = f.grid();
    ScalarField out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f(i, j);
            const double w = (i > 0) ? f(i - 1, j) : c;        // reflection ghosts
            const double e = (i + 1 < g.nx) ? f(i + 1, j) : c;
            const double s = (j > 0) ? f(i, j - 1) : c;
            const double n = (j + 1 < g.ny) ? f(i, j + 1) : c;
            out(i, j) = (w - 2.0 * c + e) * ihx2 + (s - 2.0 * c + n) * ihy2;
        }
    }
    return out;
}

ScalarField div_scaled_gradient(const ScalarField& q, const ScalarField& f) {
    const Grid2D& g = f.grid();
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double fe = 0.0, fw = 0.0, fn = 0.0, fs = 0.0;
            if (i + 1 < g.nx) fe = 0.5 * (q(i, j) + q(i + 1, j)) * (f(i + 1, j) - f(i, j)) * ihx;
            if (i > 0) fw = 0.5 * (q(i - 1, j) + q(i, j)) * (f(i, j) - f(i - 1, j)) * ihx;
            if (j + 1 < g.ny) fn = 0.5 * (q(i, j) + q(i, j + 1)) * (f(i, j + 1) - f(i, j)) * ihy;
            if (j > 0) fs = 0.5 * (q(i, j - 1) + q(i, j)) * (f(i, j) - f(i, j - 1)) * ihy;
            out(i, j) = (fe - fw) * ihx + (fn - fs) * ihy;
        }
    }
    return out;
}

ScalarField biharmonic(const ScalarField& f) { return laplacian(laplacian(f)); }

ScalarField triharmonic(const ScalarField& f) { return laplacian(biharmonic(f)); }

ScalarField helmholtz_solve(const HelmholtzCoeffs& coeffs, const ScalarField& rhs) {
    const Grid2D& g = rhs.grid();
    const CellTransform& tr = cell_transform(g);
    std::vector<double> coeff;
    tr.forward(rhs.data(), coeff);

    double rhs_l2 = 0.0;
    for (double v : rhs.data()) rhs_l2 += v * v;
    rhs_l2 = std::sqrt(rhs_l2 * g.cell_area());

    const auto& lx = tr.lambda_x();
    const auto& ly = tr.lambda_y();
    for (int ky = 0; ky < g.ny; ++ky) {
        for (int kx = 0; kx < g.nx; ++kx) {
            const std::size_t idx = static_cast<std::size_t>(ky) * g.nx + kx;
            const double lam = lx[kx] + ly[ky];
            const double symbol = coeffs.a + lam * (coeffs.b + lam * (coeffs.c + lam * coeffs.d));
            const double scale = std::abs(coeffs.a) + std::abs(lam) * (std::abs(coeffs.b) +
                                 std::abs(lam) * (std::abs(coeffs.c) + std::abs(lam) * std::abs(coeffs.d)));
            if (std::abs(symbol) <= 1e-14 * scale || scale == 0.0) {
                if (kx == 0 && ky == 0) {
                    // Zero mode annihilated: admissible only for mean-free rhs;
                    // pin the solution mean to zero.
                    const double rhs_mean = coeff[0] / (4.0 * g.nx * g.ny);
                    if (std::abs(rhs_mean) * std::sqrt(g.area()) > 1e-10 * (rhs_l2 + 1e-300))
                        throw std::invalid_argument(
                            "helmholtz_solve: zero-mode symbol vanishes but rhs is not mean-free");
                    coeff[0] = 0.0;
                    continue;
                }
                throw std::invalid_argument("helmholtz_solve: singular symbol on mode (" +
                                            std::to_string(kx) + "," + std::to_string(ky) + ")");
            }
            coeff[idx] /= symbol;
        }
    }

    ScalarField out(g);
    tr.inverse(coeff, out.data());
    return out;
}

ScalarField inv_neumann_laplacian(const ScalarField& f) {
    double l2 = 0.0;
    for (double v : f.data()) l2 += v * v;
    l2 = std::sqrt(l2 * f.grid().cell_area());
    const double m = mean(f);
    if (std::abs(m) * std::sqrt(f.grid().area()) > 1e-10 * (l2 + 1e-300))
        throw std::invalid_argument("inv_neumann_laplacian: input is not mean-free");
    return helmholtz_solve({0.0, -1.0, 0.0, 0.0}, f);
}

ScalarNorms norms(const ScalarField& f) {
    const Grid2D& g = f.grid();
    ScalarNorms out;
    double sum2 = 0.0, linf = 0.0;
    for (double v : f.data()) {
        sum2 += v * v;
        linf = std::max(linf, std::abs(v));
    }
    out.l2 = std::sqrt(sum2 * g.cell_area());
    out.linf = linf;

    const MACField grad = gradient(f);
    const MACNorms gn = mac_norms(grad);
    out.h1 = std::sqrt(out.l2 * out.l2 + gn.l2 * gn.l2);

    ScalarField mf = f;
    const double m = mean(f);
    for (double& v : mf.data()) v -= m;
    const ScalarField nf = inv_neumann_laplacian(mf);
    out.v0_star = mac_norms(gradient(nf)).l2;
    return out;
}

MACNorms mac_norms(const MACField& v) {
    const Grid2D& g = v.grid();
    MACNorms out;
    double sum2 = 0.0;
    for (double x : v.ux_data()) sum2 += x * x;
    for (double x : v.uy_data()) sum2 += x * x;
    out.l2 = std::sqrt(sum2 * g.cell_area());

    // H1 seminorm from one-sided differences with no-slip wall ghosts.
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    double grad2 = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dux = (v.ux(i + 1, j) - v.ux(i, j)) * ihx;
            grad2 += dux * dux;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double above = (j < g.ny) ? v.ux(i, j) : -v.ux(i, j - 1);
            const double below = (j > 0) ? v.ux(i, j - 1) : -v.ux(i, j);
            const double duy = (above - below) * ihy;
            grad2 += duy * duy;
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double right = (i < g.nx) ? v.uy(i, j) : -v.uy(i - 1, j);
            const double left = (i > 0) ? v.uy(i - 1, j) : -v.uy(i, j);
            const double dvx = (right - left) * ihx;
            grad2 += dvx * dvx;
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dvy = (v.uy(i, j + 1) - v.uy(i, j)) * ihy;
            grad2 += dvy * dvy;
        }
    out.h1 = std::sqrt(out.l2 * out.l2 + grad2 * g.cell_area());
    return out;
}

double inner(const ScalarField& f, const ScalarField& g) {
    double sum = 0.0;
    const auto& a = f.data();
    const auto& b = g.data();
    for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
    return sum * f.grid().cell_area();
}

double inner(const MACField& a, const MACField& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.ux_data().size(); ++k) sum += a.ux_data()[k] * b.ux_data()[k];
    for (std::size_t k = 0; k < a.uy_data().size(); ++k) sum += a.uy_data()[k] * b.uy_data()[k];
    return sum * a.grid().cell_area();
}

ScalarField galerkin_project(const ScalarField& f, int n_modes) {
    const Grid2D& g = f.grid();
    if (n_modes < 1 || static_cast<std::size_t>(n_modes) > g.size())
        throw std::invalid_argument("galerkin_project: n_modes must lie in [1, nx*ny]");
    const CellTransform& tr = cell_transform(g);
    std::vector<double> coeff;
    tr.forward(f.data(), coeff);
    const auto& order = tr.eigen_order();
    std::vector<double> kept(coeff.size(), 0.0);
    for (int m = 0; m < n_modes; ++m) {
        const auto [kx, ky] = order[m];
        const std::size_t idx = static_cast<std::size_t>(ky) * g.nx + kx;
        kept[idx] = coeff[idx];
    }
    ScalarField out(g);
    tr.inverse(kept, out.data());
    return out;
}

ScalarField restrict_to(const ScalarField& fine, const Grid2D& coarse) {
    const Grid2D& gf = fine.grid();
    if (gf.nx % coarse.nx != 0 || gf.ny % coarse.ny != 0)
        throw std::invalid_argument("restrict_to: coarse grid must divide the fine grid");
    const int rx = gf.nx / coarse.nx, ry = gf.ny / coarse.ny;
    ScalarField out(coarse);
    const double inv = 1.0 / (rx * ry);
    for (int J = 0; J < coarse.ny; ++J)
        for (int I = 0; I < coarse.nx; ++I) {
            double sum = 0.0;
            for (int j = 0; j < ry; ++j)
                for (int i = 0; i < rx; ++i) sum += fine(I * rx + i, J * ry + j);
            out(I, J) = sum * inv;
        }
    return out;
}

} // namespace nschs
