#include <doctest.h>

#include <cmath>

#include "dense_oracle.hpp"
#include "nschs/grid.hpp"
#include "nschs/spectral.hpp"

using namespace nschs;

namespace {

ScalarField cosine_mode(const Grid2D& g, int kx, int ky) {
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f(i, j) = std::cos(M_PI * kx * (i + 0.5) / g.nx) *
                      std::cos(M_PI * ky * (j + 0.5) / g.ny);
    return f;
}

double discrete_eigenvalue(const Grid2D& g, int kx, int ky) {
    const double sx = std::sin(0.5 * M_PI * kx / g.nx);
    const double sy = std::sin(0.5 * M_PI * ky / g.ny);
    return -4.0 / (g.hx() * g.hx()) * sx * sx - 4.0 / (g.hy() * g.hy()) * sy * sy;
}

} // namespace

TEST_CASE("mean of constants and of Laplacians") {
    const Grid2D g(64, 64, 1.0, 1.0);
    ScalarField c(g, 3.25);
    CHECK(mean(c) == doctest::Approx(3.25).epsilon(1e-15));

    const ScalarField f = oracle::random_field(g, 11);
    CHECK(std::abs(mean(laplacian(f))) < 1e-13 * 1e3); // telescoping fluxes

    const Grid2D g32(32, 32, 1.0, 1.0);
    ScalarField x(g32);
    for (int j = 0; j < g32.ny; ++j)
        for (int i = 0; i < g32.nx; ++i) x(i, j) = g32.x_center(i);
    CHECK(mean(x) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("constant fields have zero gradient and Laplacian") {
    const Grid2D g(8, 8, 2.0, 1.0);
    ScalarField c(g, -1.7);
    const MACField grad = gradient(c);
    CHECK(grad.max_abs() == 0.0);
    const ScalarField lap = laplacian(c);
    for (double v : lap.data()) CHECK(v == 0.0);
}

TEST_CASE("cosine modes are eigenvectors with the sine-squared eigenvalues") {
    const Grid2D g(16, 12, 2.0, 1.5);
    // Independent check of the stencil itself against a literal dense
    // assembly, then of the eigen-identity for the cosine modes.
    const oracle::Dense L = oracle::neumann_laplacian(g);
    const ScalarField f = oracle::random_field(g, 5);
    const ScalarField lf = laplacian(f);
    const std::vector<double> dense = L.apply(f.data());
    CHECK(oracle::max_abs_diff(lf.data(), dense) < 1e-11);

    for (int kx : {0, 1, 3, 15})
        for (int ky : {0, 2, 11}) {
            const ScalarField mode = cosine_mode(g, kx, ky);
            const ScalarField lm = laplacian(mode);
            const double lambda = discrete_eigenvalue(g, kx, ky);
            double worst = 0.0;
            for (std::size_t k = 0; k < lm.data().size(); ++k)
                worst = std::max(worst,
                                 std::abs(lm.data()[k] - lambda * mode.data()[k]));
            CHECK(worst < 1e-9);
        }
}

TEST_CASE("repeated Laplacians match dense powers of the stencil matrix") {
    const Grid2D g(8, 8, 1.0, 1.0);
    const oracle::Dense L = oracle::neumann_laplacian(g);
    const ScalarField f = oracle::random_field(g, 13);
    const std::vector<double> l1 = L.apply(f.data());
    const std::vector<double> l2 = L.apply(l1);
    const std::vector<double> l3 = L.apply(l2);
    CHECK(oracle::max_abs_diff(biharmonic(f).data(), l2) < 1e-8);
    CHECK(oracle::max_abs_diff(triharmonic(f).data(), l3) < 1e-5);
    // Relative to the operator scale (||L^3|| ~ (8/h^2)^3).
    double scale = 0.0;
    for (double v : l3) scale = std::max(scale, std::abs(v));
    CHECK(oracle::max_abs_diff(triharmonic(f).data(), l3) < 1e-12 * scale);
}

TEST_CASE("summation by parts: (Lap f, g) = -(grad f, grad g)") {
    const Grid2D g(8, 8, 1.0, 1.0);
    const ScalarField f = oracle::random_field(g, 21);
    const ScalarField h = oracle::random_field(g, 22);
    const double lhs = inner(laplacian(f), h);
    const double rhs = -inner(gradient(f), gradient(h));
    CHECK(oracle::rel_err(lhs, rhs) < 1e-12);
}

TEST_CASE("divergence is the negative adjoint of gradient") {
    const Grid2D g(8, 6, 1.0, 1.3);
    // (grad f, v) + (f, div v) == 0 for face fields in the no-slip space.
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MACField v(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) v.ux(i, j) = u(rng);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.uy(i, j) = u(rng);
    const ScalarField f = oracle::random_field(g, 34);
    const double lhs = inner(gradient(f), v);
    const double rhs = -inner(f, divergence(v));
    CHECK(oracle::rel_err(lhs, rhs) < 1e-12);
}

TEST_CASE("helmholtz_solve: identity, round trip, dense LU oracle") {
    const Grid2D g(8, 8, 1.0, 1.0);
    const ScalarField f = oracle::random_field(g, 51);

    SUBCASE("pure identity") {
        const ScalarField s = helmholtz_solve({1.0, 0.0, 0.0, 0.0}, f);
        CHECK(oracle::max_abs_diff(s.data(), f.data()) < 1e-13);
    }

    SUBCASE("apply then solve returns the input") {
        ScalarField rhs = laplacian(f);
        for (std::size_t k = 0; k < rhs.data().size(); ++k)
            rhs.data()[k] = f.data()[k] - rhs.data()[k]; // (I - Lap) f
        const ScalarField s = helmholtz_solve({1.0, -1.0, 0.0, 0.0}, rhs);
        double scale = 0.0;
        for (double v : f.data()) scale = std::max(scale, std::abs(v));
        CHECK(oracle::max_abs_diff(s.data(), f.data()) < 1e-12 * scale);
    }

    SUBCASE("matches a dense LU solve for a full third-order symbol") {
        const HelmholtzCoeffs c{0.7, -1.3, 0.2, -0.05};
        const ScalarField fast = helmholtz_solve(c, f);
        const oracle::Dense m = oracle::helmholtz_matrix(g, c.a, c.b, c.c, c.d);
        const std::vector<double> direct = oracle::lu_solve(m, f.data());
        double scale = 0.0;
        for (double v : direct) scale = std::max(scale, std::abs(v));
        CHECK(oracle::max_abs_diff(fast.data(), direct) < 1e-10 * std::max(1.0, scale));
    }

    SUBCASE("vanishing zero-mode symbol requires mean-free data") {
        CHECK_THROWS_AS((void)helmholtz_solve({0.0, 1.0, 0.0, 0.0}, f),
                        std::invalid_argument);
        const ScalarField mf = oracle::make_mean_free(f);
        const ScalarField s = helmholtz_solve({0.0, 1.0, 0.0, 0.0}, mf);
        CHECK(std::abs(mean(s)) < 1e-12);
    }
}

TEST_CASE("inverse Neumann Laplacian") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ScalarField gfield = oracle::make_mean_free(oracle::random_field(g, 61));

    SUBCASE("inverts -Lap on mean-free fields") {
        ScalarField rhs = laplacian(gfield);
        for (double& v : rhs.data()) v = -v;
        const ScalarField back = inv_neumann_laplacian(rhs);
        double scale = 0.0;
        for (double v : gfield.data()) scale = std::max(scale, std::abs(v));
        CHECK(oracle::max_abs_diff(back.data(), gfield.data()) < 1e-11 * scale);
    }

    SUBCASE("dual-norm identity ||grad N f||^2 = (f, N f)") {
        const ScalarField nf = inv_neumann_laplacian(gfield);
        const MACNorms gn = mac_norms(gradient(nf));
        const double direct = inner(gfield, nf);
        CHECK(oracle::rel_err(gn.l2 * gn.l2, direct) < 1e-12);
    }

    SUBCASE("single cosine mode divides by its eigenvalue") {
        const ScalarField mode = cosine_mode(g, 3, 2);
        const ScalarField n = inv_neumann_laplacian(mode);
        const double lambda = -discrete_eigenvalue(g, 3, 2);
        double worst = 0.0;
        for (std::size_t k = 0; k < n.data().size(); ++k)
            worst = std::max(worst, std::abs(n.data()[k] - mode.data()[k] / lambda));
        CHECK(worst < 1e-12);
    }

    SUBCASE("rejects data with a mean") {
        CHECK_THROWS_AS((void)inv_neumann_laplacian(ScalarField(g, 1.0)),
                        std::invalid_argument);
    }

    SUBCASE("matches the dense pseudo-inverse on 8x8") {
        const Grid2D g8(8, 8, 1.0, 1.0);
        const ScalarField f8 = oracle::make_mean_free(oracle::random_field(g8, 62));
        // -L is singular on constants; pin the mean with a rank-one shift.
        oracle::Dense m = oracle::neumann_laplacian(g8);
        const int n = m.n;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) m.at(r, c) = -m.at(r, c) + 1.0 / n;
        const std::vector<double> direct = oracle::lu_solve(m, f8.data());
        const ScalarField fast = inv_neumann_laplacian(f8);
        CHECK(oracle::max_abs_diff(fast.data(), direct) < 1e-10);
    }
}

TEST_CASE("norms") {
    const Grid2D g(16, 16, 1.0, 1.0);

    SUBCASE("constant on the unit square") {
        const ScalarNorms n = norms(ScalarField(g, -2.0));
        CHECK(n.l2 == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(n.linf == 2.0);
    }

    SUBCASE("sign-alternating field has unit sup norm") {
        ScalarField f(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) f(i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        CHECK(norms(f).linf == 1.0);
    }

    SUBCASE("dual norm bounded by the first nonzero eigenvalue") {
        // ||f||_{V0*} <= ||f|| / sqrt(lambda_1) with the discrete lambda_1,
        // which is within 5% of (pi/Lx)^2 on this grid.
        const double lambda1 = -discrete_eigenvalue(g, 1, 0);
        for (unsigned seed : {71u, 72u, 73u}) {
            const ScalarField f = oracle::make_mean_free(oracle::random_field(g, seed));
            const ScalarNorms n = norms(f);
            CHECK(n.v0_star <= n.l2 / std::sqrt(lambda1) * (1.0 + 1e-12));
            CHECK(n.v0_star <= (g.Lx / M_PI) * n.l2 * 1.05);
        }
    }
}

TEST_CASE("spectral truncation") {
    const Grid2D g(16, 16, 1.0, 1.0);
    const ScalarField f = oracle::random_field(g, 81);

    SUBCASE("keeping every mode is the identity") {
        const ScalarField p = galerkin_project(f, g.nx * g.ny);
        CHECK(oracle::max_abs_diff(p.data(), f.data()) < 1e-12);
    }

    SUBCASE("keeping one mode leaves the mean") {
        const ScalarField p = galerkin_project(f, 1);
        const double m = mean(f);
        for (double v : p.data()) CHECK(v == doctest::Approx(m).epsilon(1e-12));
    }

    SUBCASE("idempotent and mean preserving") {
        const ScalarField p1 = galerkin_project(f, 37);
        const ScalarField p2 = galerkin_project(p1, 37);
        CHECK(oracle::max_abs_diff(p1.data(), p2.data()) < 1e-12);
        CHECK(mean(p1) == doctest::Approx(mean(f)).epsilon(1e-12));
    }

    SUBCASE("self-adjoint on random fields") {
        const ScalarField h = oracle::random_field(g, 82);
        const double lhs = inner(galerkin_project(f, 23), h);
        const double rhs = inner(f, galerkin_project(h, 23));
        CHECK(oracle::rel_err(lhs, rhs) < 1e-12);
    }

    SUBCASE("matches the dense projector on 8x8") {
        const Grid2D g8(8, 8, 1.0, 1.0);
        const ScalarField f8 = oracle::random_field(g8, 83);
        const int keep = 11;
        // Dense projector from explicitly orthonormalized cosine modes in
        // the same eigenvalue-then-lexicographic order.
        const CellTransform& tr = cell_transform(g8);
        const auto& order = tr.eigen_order();
        std::vector<double> want(f8.size(), 0.0);
        for (int m = 0; m < keep; ++m) {
            ScalarField mode = cosine_mode(g8, order[m].first, order[m].second);
            double norm2 = 0.0;
            for (double v : mode.data()) norm2 += v * v;
            double coef = 0.0;
            for (std::size_t k = 0; k < f8.size(); ++k)
                coef += mode.data()[k] * f8.data()[k];
            coef /= norm2;
            for (std::size_t k = 0; k < f8.size(); ++k)
                want[k] += coef * mode.data()[k];
        }
        const ScalarField got = galerkin_project(f8, keep);
        CHECK(oracle::max_abs_diff(got.data(), want) < 1e-10);
    }
}

TEST_CASE("restriction by cell averaging") {
    const Grid2D fine(16, 16, 1.0, 1.0);
    const Grid2D coarse(8, 8, 1.0, 1.0);
    const ScalarField f = oracle::random_field(fine, 91);
    const ScalarField r = restrict_to(f, coarse);
    CHECK(r(0, 0) ==
          doctest::Approx(0.25 * (f(0, 0) + f(1, 0) + f(0, 1) + f(1, 1))).epsilon(1e-15));
    CHECK(mean(r) == doctest::Approx(mean(f)).epsilon(1e-13));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid2D(3, 8, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid2D(8, 8, -1.0, 1.0), std::invalid_argument);
}
