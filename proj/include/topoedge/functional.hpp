#pragma once

#include <Eigen/Core>

#include "topoedge/grid.hpp"

namespace topoedge {

/// Model parameters. eps and delta are in physical units.
struct Params {
    double alpha = 8.0;
    double beta = 150.0;
    double eps = 3.0;
    double kappa = 0.1;
    double delta = 2.0;
    int n_max = 1;

    void validate() const;
};

/// J(u,v) = 1/2 ||u - f||_M^2 + alpha/2 sum_e v_e u_e' K_e u_e.
/// `f_nodes` is the nodal interpolant of the (already scaled) image.
double energy_J(const Grid& grid, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                const Eigen::VectorXd& f_nodes, double alpha);

/// J_eps = J + 2 beta eps m, with m the placed-strip count.
double energy_Jeps(const Grid& grid, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const Eigen::VectorXd& f_nodes, const Params& p, int strip_count);

/// Predicted change of J_eps for the optimally oriented strip at a point with
/// gradient g: 2 beta eps - 2 alpha eps^3 (1-kappa)/kappa |g|^2.
double topo_decrease(const Eigen::Vector2d& g, const Params& p);

/// Profitability threshold on |grad u|^2: beta kappa / (alpha eps^2 (1-kappa)).
double threshold(const Params& p);

/// M g . g with M = (1/kappa) n (x) n + tau (x) tau and n = tau^perp.
double anisotropic_score(const Eigen::Vector2d& g, const Eigen::Vector2d& tau, double kappa);

}  // namespace topoedge
