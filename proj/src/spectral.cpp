#include "nschs/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace nschs {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> neumann_eigenvalues(int n, double h) {
    std::vector<double> lam(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(0.5 * M_PI * static_cast<double>(k) / n);
        lam[k] = -4.0 / (h * h) * s * s;
    }
    return lam;
}

// Eigenvalues shared by DST-I (interior nodes, offset by one) and DST-II
// (staggered anti-reflection): -(4/h^2) sin^2(pi (k+1) / (2n)).
std::vector<double> dirichlet_eigenvalues(int m, int n_cells, double h) {
    std::vector<double> lam(m);
    for (int k = 0; k < m; ++k) {
        const double s = std::sin(0.5 * M_PI * static_cast<double>(k + 1) / n_cells);
        lam[k] = -4.0 / (h * h) * s * s;
    }
    return lam;
}

} // namespace

CellTransform::CellTransform(const Grid2D& g) : grid_(g) {
    lambda_x_ = neumann_eigenvalues(g.nx, g.hx());
    lambda_y_ = neumann_eigenvalues(g.ny, g.hy());
    buf_in_.resize(g.size());
    buf_out_.resize(g.size());
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_r2r_2d(g.ny, g.nx, buf_in_.data(), buf_out_.data(),
                                 FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_r2r_2d(g.ny, g.nx, buf_in_.data(), buf_out_.data(),
                                 FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
}

CellTransform::~CellTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void CellTransform::forward(const std::vector<double>& in, std::vector<double>& coeff) const {
    std::copy(in.begin(), in.end(), buf_in_.begin());
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    coeff.assign(buf_out_.begin(), buf_out_.end());
}

void CellTransform::inverse(const std::vector<double>& coeff, std::vector<double>& out) const {
    std::copy(coeff.begin(), coeff.end(), buf_in_.begin());
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    const double scale = 1.0 / (4.0 * grid_.nx * grid_.ny);
    out.resize(buf_out_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf_out_[k] * scale;
}

const std::vector<std::pair<int, int>>& CellTransform::eigen_order() const {
    if (order_.empty()) {
        order_.reserve(grid_.size());
        for (int ky = 0; ky < grid_.ny; ++ky)
            for (int kx = 0; kx < grid_.nx; ++kx) order_.emplace_back(kx, ky);
        std::sort(order_.begin(), order_.end(), [this](const auto& a, const auto& b) {
            const double la = std::abs(lambda_x_[a.first] + lambda_y_[a.second]);
            const double lb = std::abs(lambda_x_[b.first] + lambda_y_[b.second]);
            if (la != lb) return la < lb;
            return a < b;
        });
    }
    return order_;
}

FaceTransform::FaceTransform(const Grid2D& g, int component) {
    // The fast (contiguous) dimension is x for both components.
    if (component == 0) {
        n_fast_ = g.nx - 1; // interior vertical faces
        n_slow_ = g.ny;
        lambda_fast_ = dirichlet_eigenvalues(n_fast_, g.nx, g.hx());
        lambda_slow_ = dirichlet_eigenvalues(n_slow_, g.ny, g.hy());
        buf_in_.resize(static_cast<std::size_t>(n_fast_) * n_slow_);
        buf_out_.resize(buf_in_.size());
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_fwd_ = fftw_plan_r2r_2d(n_slow_, n_fast_, buf_in_.data(), buf_out_.data(),
                                     FFTW_RODFT10, FFTW_RODFT00, FFTW_ESTIMATE);
        plan_inv_ = fftw_plan_r2r_2d(n_slow_, n_fast_, buf_in_.data(), buf_out_.data(),
                                     FFTW_RODFT01, FFTW_RODFT00, FFTW_ESTIMATE);
        scale_ = 1.0 / (2.0 * g.nx) / (2.0 * g.ny);
    } else {
        n_fast_ = g.nx;
        n_slow_ = g.ny - 1; // interior horizontal faces
        lambda_fast_ = dirichlet_eigenvalues(n_fast_, g.nx, g.hx());
        lambda_slow_ = dirichlet_eigenvalues(n_slow_, g.ny, g.hy());
        buf_in_.resize(static_cast<std::size_t>(n_fast_) * n_slow_);
        buf_out_.resize(buf_in_.size());
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_fwd_ = fftw_plan_r2r_2d(n_slow_, n_fast_, buf_in_.data(), buf_out_.data(),
                                     FFTW_RODFT00, FFTW_RODFT10, FFTW_ESTIMATE);
        plan_inv_ = fftw_plan_r2r_2d(n_slow_, n_fast_, buf_in_.data(), buf_out_.data(),
                                     FFTW_RODFT00, FFTW_RODFT01, FFTW_ESTIMATE);
        scale_ = 1.0 / (2.0 * g.nx) / (2.0 * g.ny);
    }
}

FaceTransform::~FaceTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void FaceTransform::forward(const std::vector<double>& in, std::vector<double>& coeff) const {
    std::copy(in.begin(), in.end(), buf_in_.begin());
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    coeff.assign(buf_out_.begin(), buf_out_.end());
}

void FaceTransform::inverse(const std::vector<double>& coeff, std::vector<double>& out) const {
    std::copy(coeff.begin(), coeff.end(), buf_in_.begin());
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    out.resize(buf_out_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf_out_[k] * scale_;
}

const CellTransform& cell_transform(const Grid2D& g) {
    using Key = std::tuple<int, int, double, double>;
    thread_local std::map<Key, std::unique_ptr<CellTransform>> cache;
    const Key key{g.nx, g.ny, g.Lx, g.Ly};
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<CellTransform>(g)).first;
    return *it->second;
}

const FaceTransform& face_transform(const Grid2D& g, int component) {
    using Key = std::tuple<int, int, double, double, int>;
    thread_local std::map<Key, std::unique_ptr<FaceTransform>> cache;
    const Key key{g.nx, g.ny, g.Lx, g.Ly, component};
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<FaceTransform>(g, component)).first;
    return *it->second;
}

} // namespace nschs
