#include "topoedge/fem.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <vector>

namespace topoedge {

const Eigen::Matrix4d& element_stiffness() {
    static const Eigen::Matrix4d K = (Eigen::Matrix4d() <<  //
                                          4, -1, -1, -2,    //
                                          -1, 4, -2, -1,    //
                                          -1, -2, 4, -1,    //
                                          -2, -1, -1, 4)
                                         .finished() /
                                     6.0;
    return K;
}

const Eigen::Matrix4d& element_mass_unit() {
    static const Eigen::Matrix4d M = (Eigen::Matrix4d() <<  //
                                          4, 2, 2, 1,       //
                                          2, 4, 1, 2,       //
                                          2, 1, 4, 2,       //
                                          1, 2, 2, 4)
                                         .finished() /
                                     36.0;
    return M;
}

namespace {

SparseOperator assemble_impl(const Grid& grid, const Eigen::VectorXd* v, double alpha,
                             bool with_mass) {
    const Eigen::Matrix4d& Ke = element_stiffness();
    const Eigen::Matrix4d Me = element_mass_unit() * (grid.h * grid.h);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(grid.element_count()) * 16);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const int e = grid.element_index(i, j);
            const auto nodes = grid.element_nodes(i, j);
            const double ve = v ? (*v)[e] : 1.0;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    double val = alpha * ve * Ke(a, b);
                    if (with_mass) val += Me(a, b);
                    triplets.emplace_back(nodes[a], nodes[b], val);
                }
            }
        }
    }
    SparseOperator A(grid.node_count(), grid.node_count());
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    return A;
}

}  // namespace

SparseOperator assemble(const Grid& grid, const Eigen::VectorXd& v, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("assemble: alpha must be positive");
    if (v.size() != grid.element_count())
        throw std::invalid_argument("assemble: diffusivity size mismatch");
    for (int e = 0; e < v.size(); ++e)
        if (v[e] <= 0.0 || v[e] > 1.0)
            throw std::invalid_argument("assemble: diffusivity entries must lie in (0,1]");
    return assemble_impl(grid, &v, alpha, true);
}

SparseOperator assemble_mass(const Grid& grid) { return assemble_impl(grid, nullptr, 0.0, true); }

Eigen::VectorXd image_to_nodes(const Grid& grid, const Image& f, double scale) {
    if (f.width != grid.nx || f.height != grid.ny)
        throw std::invalid_argument("image_to_nodes: image does not match grid");
    Eigen::VectorXd fn(grid.node_count());
    for (int j = 0; j <= grid.ny; ++j) {
        const int pj = std::min(j, grid.ny - 1);
        for (int i = 0; i <= grid.nx; ++i) {
            const int pi = std::min(i, grid.nx - 1);
            fn[grid.node_index(i, j)] = scale * f.at(pi, pj);
        }
    }
    return fn;
}

Eigen::VectorXd project_rhs(const Grid& grid, const Image& f, double scale) {
    return assemble_mass(grid) * image_to_nodes(grid, f, scale);
}

Eigen::VectorXd solve(const SparseOperator& A, const Eigen::VectorXd& b,
                      const SolverConfig& config, const Eigen::VectorXd* guess) {
    if (config.cg_tol <= 0.0) throw std::invalid_argument("solve: cg_tol must be positive");
    Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(config.cg_tol);
    cg.setMaxIterations(config.cg_maxit > 0 ? config.cg_maxit
                                            : 10 * static_cast<int>(A.rows()));
    cg.compute(A);
    Eigen::VectorXd x;
    if (guess)
        x = cg.solveWithGuess(b, *guess);
    else
        x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
        throw SolveError("CG did not converge: relative residual " +
                             std::to_string(cg.error()) + " after " +
                             std::to_string(cg.iterations()) + " iterations",
                         cg.error());
    }
    return x;
}

Eigen::Vector2d element_gradient(const Grid& grid, const Eigen::VectorXd& u, int e) {
    if (e < 0 || e >= grid.element_count())
        throw std::out_of_range("element_gradient: element index out of range");
    const auto n = grid.element_nodes(e);
    const double inv2h = 1.0 / (2.0 * grid.h);
    return {(u[n[1]] + u[n[3]] - u[n[0]] - u[n[2]]) * inv2h,
            (u[n[2]] + u[n[3]] - u[n[0]] - u[n[1]]) * inv2h};
}

}  // namespace topoedge
