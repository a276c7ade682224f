#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "topoedge/grid.hpp"

namespace topoedge {

/// Matrix-free c_mass * Mass + c_diff * Stiffness(v) where v equals 1
/// everywhere except on `strip_elements`, where it equals kappa.
///
/// The constant-coefficient part is a 9-point tensor-product stencil (the
/// bilinear basis is a product of 1D hats); the strip shows up as a small
/// per-element correction. This keeps memory at a few vectors even on grids
/// with tens of millions of nodes.
class StencilOperator {
public:
    StencilOperator(const Grid& grid, double c_mass, double c_diff, double kappa,
                    std::vector<int> strip_elements);

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    int size() const { return grid_.node_count(); }
    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    double c_mass_;
    double c_diff_;
    double kappa_;
    std::vector<int> strip_elements_;
    double w_[3][3];  // interior stencil weights
};

/// Exact inverse of the constant-coefficient operator (v = 1) via DCT-I:
/// the 1D Neumann mass and stiffness matrices share the cos(pi j k / n)
/// eigenvectors once the half-weighted boundary rows are factored out as a
/// diagonal scaling. For the pure-stiffness case (c_mass = 0) the constant
/// mode is projected out, giving the pseudo-inverse.
class DctPreconditioner {
public:
    DctPreconditioner(const Grid& grid, double c_mass, double c_diff);
    ~DctPreconditioner();
    DctPreconditioner(const DctPreconditioner&) = delete;
    DctPreconditioner& operator=(const DctPreconditioner&) = delete;

    void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct PcgResult {
    Eigen::VectorXd x;
    double relative_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Preconditioned CG. With `project_constants` the residual and search
/// directions are kept orthogonal to the constant nullspace (pure-Neumann
/// stiffness systems).
PcgResult solve_pcg(const StencilOperator& op, const DctPreconditioner& precond,
                    const Eigen::VectorXd& b, double tol, int maxit,
                    const Eigen::VectorXd* guess = nullptr, bool project_constants = false);

}  // namespace topoedge
