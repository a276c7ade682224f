#pragma once

#include <Eigen/Core>

namespace topoedge {

/// Uniform rectangular grid of nx*ny square elements with spacing h.
/// Nodes are the (nx+1)*(ny+1) element corners; element (i,j) has corners
/// (i,j), (i+1,j), (i,j+1), (i+1,j+1). Indices are row-major in x.
struct Grid {
    int nx = 0;
    int ny = 0;
    double h = 1.0;

    Grid() = default;
    Grid(int nx_, int ny_, double h_) : nx(nx_), ny(ny_), h(h_) {}

    int node_count() const { return (nx + 1) * (ny + 1); }
    int element_count() const { return nx * ny; }

    int node_index(int i, int j) const { return j * (nx + 1) + i; }
    int element_index(int i, int j) const { return j * nx + i; }

    /// Physical midpoint of element (i,j).
    Eigen::Vector2d element_midpoint(int i, int j) const {
        return {(i + 0.5) * h, (j + 0.5) * h};
    }
    Eigen::Vector2d element_midpoint(int e) const {
        return element_midpoint(e % nx, e / nx);
    }

    double width() const { return nx * h; }
    double height() const { return ny * h; }

    /// Corner node indices of element (i,j) in local order
    /// [lower-left, lower-right, upper-left, upper-right].
    std::array<int, 4> element_nodes(int i, int j) const {
        return {node_index(i, j), node_index(i + 1, j),
                node_index(i, j + 1), node_index(i + 1, j + 1)};
    }
    std::array<int, 4> element_nodes(int e) const {
        return element_nodes(e % nx, e / nx);
    }
};

}  // namespace topoedge
