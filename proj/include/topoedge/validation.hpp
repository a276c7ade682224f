#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <vector>

#include "topoedge/edge_geometry.hpp"
#include "topoedge/fem.hpp"
#include "topoedge/functional.hpp"
#include "topoedge/image.hpp"

namespace topoedge {

/// Relative residual of the discrete energy identity
///   J(u_eps, v_eps) - J(u, v_K) = alpha (kappa-1)/2 int_omega grad u_eps . grad u
/// which holds exactly in the Galerkin discretization; the residual measures
/// solver tolerance effects only. Throws if the strip raster overlaps K.
double check_energy_identity(const Image& f, const EdgeSet& K, const Strip& strip,
                             const Params& params, const SolverConfig& solver,
                             double intensity_scale = 1.0);

struct ExpansionRow {
    double eps = 0.0;
    int grid_n = 0;
    double direct = 0.0;     // J(u_eps, v_eps) - J(u, 1) from two solves
    double predicted = 0.0;  // (alpha/2)(kappa-1) |omega| M grad u . grad u,
                             // |omega| the exact rasterized area (~ 4 eps^3)
    double ratio = 0.0;
    double residual_over_eps3 = 0.0;
};

struct ExpansionReport {
    std::vector<ExpansionRow> rows;
};

void write_expansion_csv(const ExpansionReport& report, std::ostream& out);

/// Checks the O(eps^3) expansion against two discrete solves per eps.
/// `f_smooth` is a smooth analytic datum on [0,1]^2, sampled at the nodes of a
/// per-eps grid with n = ceil(1/eps^2) elements per side so the continuum
/// strip width 2 eps^2 stays representable (no h/2 rasterization floor here).
/// `eps_list` must be strictly decreasing.
ExpansionReport verify_expansion(const std::function<double(double, double)>& f_smooth,
                                 const Eigen::Vector2d& y, const Eigen::Vector2d& tau,
                                 const std::vector<double>& eps_list, const Params& params,
                                 const SolverConfig& solver);

struct TensorEstimate {
    double eps = 0.0;
    double kappa = 0.0;
    double m_tt = 0.0;  // estimate of M tau . tau (reference 1)
    double m_nn = 0.0;  // estimate of M n . n (reference 1/kappa)
};

void write_tensor_csv(const std::vector<TensorEstimate>& estimates, std::ostream& out);

/// Polarization-tensor entry M xi . xi via the corrector problem
///   div(gamma_eps grad W) = div((1-kappa) 1_omega xi),  gamma_eps dW/dnu = 0,
/// solved on an n x n unit-square grid with the strip centered in the domain
/// and tangent (1,0). The pure-Neumann nullspace is projected out.
double estimate_polarization(const Eigen::Vector2d& xi, double eps, double kappa, int n,
                             const SolverConfig& solver);

/// Both eigenvalue estimates at once (xi = tangent and xi = normal).
TensorEstimate estimate_polarization_pair(double eps, double kappa, int n,
                                          const SolverConfig& solver);

}  // namespace topoedge
