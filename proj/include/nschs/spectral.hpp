#pragma once

// FFTW-backed transform workspaces. Cell-centered scalars use DCT-II/III
// (the eigenbasis of the reflection-ghost Neumann Laplacian); the two MAC
// velocity components use sine bases matching no-slip walls: DST-I across
// the component's own axis (faces pinned to zero at the walls) and DST-II
// along the tangential axis (anti-reflection ghosts).
//
// Workspaces are cached per thread, so concurrent simulations on different
// threads never share buffers; plan creation is serialized internally
// because the FFTW planner is not thread safe. Plans use FFTW_ESTIMATE,
// keeping results bitwise reproducible run to run.

#include <utility>
#include <vector>

#include "nschs/grid.hpp"

namespace nschs {

class CellTransform {
public:
    explicit CellTransform(const Grid2D& g);
    ~CellTransform();
    CellTransform(const CellTransform&) = delete;
    CellTransform& operator=(const CellTransform&) = delete;

    void forward(const std::vector<double>& in, std::vector<double>& coeff) const;
    /// Includes the 1/(4 nx ny) normalization of the DCT-II/III round trip.
    void inverse(const std::vector<double>& coeff, std::vector<double>& out) const;

    const std::vector<double>& lambda_x() const { return lambda_x_; }
    const std::vector<double>& lambda_y() const { return lambda_y_; }
    /// Modes ordered by ascending |lambda| then lexicographic (kx, ky).
    const std::vector<std::pair<int, int>>& eigen_order() const;

    const Grid2D& grid() const { return grid_; }

private:
    Grid2D grid_;
    std::vector<double> lambda_x_;
    std::vector<double> lambda_y_;
    mutable std::vector<std::pair<int, int>> order_;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
    mutable std::vector<double> buf_in_;
    mutable std::vector<double> buf_out_;
};

/// Transform for the interior unknowns of one MAC component.
/// component 0: ux interior, (nx-1) x ny values; component 1: uy, nx x (ny-1).
class FaceTransform {
public:
    FaceTransform(const Grid2D& g, int component);
    ~FaceTransform();
    FaceTransform(const FaceTransform&) = delete;
    FaceTransform& operator=(const FaceTransform&) = delete;

    int n_fast() const { return n_fast_; }
    int n_slow() const { return n_slow_; }
    void forward(const std::vector<double>& in, std::vector<double>& coeff) const;
    void inverse(const std::vector<double>& coeff, std::vector<double>& out) const;

    const std::vector<double>& lambda_fast() const { return lambda_fast_; }
    const std::vector<double>& lambda_slow() const { return lambda_slow_; }

private:
    int n_fast_ = 0; // contiguous dimension
    int n_slow_ = 0;
    double scale_ = 1.0;
    std::vector<double> lambda_fast_;
    std::vector<double> lambda_slow_;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
    mutable std::vector<double> buf_in_;
    mutable std::vector<double> buf_out_;
};

/// Thread-local caches keyed by grid (and component).
const CellTransform& cell_transform(const Grid2D& g);
const FaceTransform& face_transform(const Grid2D& g, int component);

} // namespace nschs
