#include "topoedge/functional.hpp"

#include <cmath>
#include <stdexcept>

#include "topoedge/fem.hpp"

namespace topoedge {

void Params::validate() const {
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    if (kappa <= 0.0 || kappa >= 1.0)
        throw std::invalid_argument("kappa must lie in the open interval (0,1)");
    if (delta <= 0.0 || delta >= eps)
        throw std::invalid_argument("delta must satisfy 0 < delta < eps");
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
}

double energy_J(const Grid& grid, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                const Eigen::VectorXd& f_nodes, double alpha) {
    if (u.size() != grid.node_count() || f_nodes.size() != grid.node_count() ||
        v.size() != grid.element_count())
        throw std::invalid_argument("energy_J: dimension mismatch");
    const Eigen::Matrix4d& Ke = element_stiffness();
    const Eigen::Matrix4d Me = element_mass_unit() * (grid.h * grid.h);
    double fidelity = 0.0;
    double gradient = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const auto n = grid.element_nodes(i, j);
            Eigen::Vector4d ue, de;
            for (int a = 0; a < 4; ++a) {
                ue[a] = u[n[a]];
                de[a] = u[n[a]] - f_nodes[n[a]];
            }
            fidelity += de.dot(Me * de);
            gradient += v[grid.element_index(i, j)] * ue.dot(Ke * ue);
        }
    }
    return 0.5 * fidelity + 0.5 * alpha * gradient;
}

double energy_Jeps(const Grid& grid, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const Eigen::VectorXd& f_nodes, const Params& p, int strip_count) {
    return energy_J(grid, u, v, f_nodes, p.alpha) + 2.0 * p.beta * p.eps * strip_count;
}

double topo_decrease(const Eigen::Vector2d& g, const Params& p) {
    const double e3 = p.eps * p.eps * p.eps;
    return 2.0 * p.beta * p.eps -
           2.0 * p.alpha * e3 * (1.0 - p.kappa) / p.kappa * g.squaredNorm();
}

double threshold(const Params& p) {
    return p.beta * p.kappa / (p.alpha * p.eps * p.eps * (1.0 - p.kappa));
}

double anisotropic_score(const Eigen::Vector2d& g, const Eigen::Vector2d& tau, double kappa) {
    if (std::abs(tau.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("anisotropic_score: tau must be a unit vector");
    const Eigen::Vector2d n(-tau.y(), tau.x());
    const double gn = g.dot(n);
    const double gt = g.dot(tau);
    return gn * gn / kappa + gt * gt;
}

}  // namespace topoedge
