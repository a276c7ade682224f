#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <stdexcept>

#include "topoedge/grid.hpp"
#include "topoedge/image.hpp"

namespace topoedge {

using SparseOperator = Eigen::SparseMatrix<double>;

struct SolverConfig {
    double cg_tol = 1e-10;  // relative residual ||A u - b|| <= cg_tol * ||b||
    int cg_maxit = 0;       // 0: use 10 * node_count
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& msg, double residual)
        : std::runtime_error(msg), achieved_residual(residual) {}
    double achieved_residual;
};

/// Element stiffness of the bilinear basis on a square element (h-independent
/// in 2D), local node order [ll, lr, ul, ur].
const Eigen::Matrix4d& element_stiffness();

/// Element mass matrix scaled by h^2 (the h^2/36 [4,2,2,1] pattern with h = 1).
const Eigen::Matrix4d& element_mass_unit();

/// A = Mass + alpha * Stiffness(v). `v` holds one diffusivity per element.
SparseOperator assemble(const Grid& grid, const Eigen::VectorXd& v, double alpha);

/// Mass matrix alone (used by the right-hand side and by energy evaluation).
SparseOperator assemble_mass(const Grid& grid);

/// Nodal interpolant of the image: pixel (i,j) lands on node (i,j); the extra
/// right/bottom node row copies the adjacent pixel. `scale` multiplies f.
Eigen::VectorXd image_to_nodes(const Grid& grid, const Image& f, double scale = 1.0);

/// Load vector b = Mass * f_nodes.
Eigen::VectorXd project_rhs(const Grid& grid, const Image& f, double scale = 1.0);

/// Jacobi-preconditioned CG with an optional warm start. Throws SolveError on
/// non-convergence.
Eigen::VectorXd solve(const SparseOperator& A, const Eigen::VectorXd& b,
                      const SolverConfig& config, const Eigen::VectorXd* guess = nullptr);

/// Exact gradient of the bilinear interpolant at the midpoint of element e.
Eigen::Vector2d element_gradient(const Grid& grid, const Eigen::VectorXd& u, int e);

}  // namespace topoedge
