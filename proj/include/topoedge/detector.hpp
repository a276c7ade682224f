#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <vector>

#include "topoedge/edge_geometry.hpp"
#include "topoedge/fem.hpp"
#include "topoedge/functional.hpp"
#include "topoedge/grid.hpp"
#include "topoedge/image.hpp"

namespace topoedge {

struct TraceRow {
    int iter = 0;
    double x = 0.0;
    double y = 0.0;
    double gradsq = 0.0;
    double predicted_delta = 0.0;
    double j_eps = 0.0;
};

struct Trace {
    std::vector<TraceRow> rows;            // one row per accepted strip
    std::vector<double> j_eps_after_resolve;  // updating algorithm only
};

void write_trace_csv(const Trace& trace, std::ostream& out);

struct DetectorResult {
    Grid grid;
    EdgeSet edges;
    Eigen::VectorXd u;
    Eigen::VectorXd v;  // edge indicator for the final K
    Trace trace;
    int solve_count = 0;
};

/// Greedy detector on the once-smoothed image: u is solved a single time with
/// v = 1 and never refreshed.
DetectorResult detect_static(const Image& f, const Params& params,
                             const SolverConfig& solver, double intensity_scale = 1.0);

/// Interleaved variant: after every n_max accepted strips the edge indicator
/// is refreshed and u re-solved (warm-started from the previous u).
DetectorResult detect_updating(const Image& f, const Params& params,
                               const SolverConfig& solver, double intensity_scale = 1.0);

/// n_max so that roughly 10 re-solves cover the estimated strip count; the
/// estimate defaults to a perimeter heuristic, 2(nx+ny)/(2 eps/h).
int choose_nmax(int nx, int ny, double eps, double h,
                std::optional<int> estimated_strips = std::nullopt);

}  // namespace topoedge
