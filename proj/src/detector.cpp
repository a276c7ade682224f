#include "topoedge/detector.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace topoedge {

void write_trace_csv(const Trace& trace, std::ostream& out) {
    out.precision(17);
    out << "iter,x,y,gradsq,predicted_delta,J_eps\n";
    for (const TraceRow& r : trace.rows) {
        out << r.iter << "," << r.x << "," << r.y << "," << r.gradsq << ","
            << r.predicted_delta << "," << r.j_eps << "\n";
    }
}

namespace {

struct RunState {
    Grid grid;
    Eigen::VectorXd f_nodes;
    CandidateMask mask;
    EdgeSet edges;
    Eigen::VectorXd u;
    double j_current = 0.0;  // J(u, v_K), maintained incrementally
    int iter = 0;

    explicit RunState(const Grid& g) : grid(g), edges(g) {}
};

// Admissible element with the largest midpoint gradient; first (smallest
// row-major index) wins ties.
std::pair<int, double> argmax_gradient(const RunState& s) {
    int best = -1;
    double best_sq = -1.0;
    for (int e = 0; e < s.grid.element_count(); ++e) {
        if (!s.mask.admissible[e]) continue;
        const double sq = element_gradient(s.grid, s.u, e).squaredNorm();
        if (sq > best_sq) {
            best_sq = sq;
            best = e;
        }
    }
    return {best, best_sq};
}

// Accepts up to `limit` strips against the current u. Returns the number
// accepted; stops early once the best admissible gradient drops below the
// threshold or the mask empties.
int accept_strips(RunState& s, const Params& p, double thresh, int limit, Trace& trace) {
    const Eigen::Matrix4d& Ke = element_stiffness();
    int accepted = 0;
    while (accepted < limit) {
        const auto [e, gradsq] = argmax_gradient(s);
        if (e < 0 || gradsq < thresh) break;
        const Eigen::Vector2d mid = s.grid.element_midpoint(e);
        const Eigen::Vector2d g = element_gradient(s.grid, s.u, e);
        const Strip strip = make_strip(mid, g, p.eps);
        const std::vector<int> fresh = s.edges.add(strip, rasterize_strip(strip, s.grid));
        exclude(s.mask, enlargement(strip, p.delta, s.grid));
        // Elements flipping 1 -> kappa change the gradient term of J only.
        for (int fe : fresh) {
            const auto n = s.grid.element_nodes(fe);
            Eigen::Vector4d ue;
            for (int a = 0; a < 4; ++a) ue[a] = s.u[n[a]];
            s.j_current -= (1.0 - p.kappa) * 0.5 * p.alpha * ue.dot(Ke * ue);
        }
        ++accepted;
        ++s.iter;
        trace.rows.push_back({s.iter, mid.x(), mid.y(), gradsq, topo_decrease(g, p),
                              s.j_current +
                                  2.0 * p.beta * p.eps * static_cast<int>(s.edges.strips.size())});
    }
    return accepted;
}

RunState init_state(const Image& f, const Params& params, double intensity_scale) {
    params.validate();
    const Grid grid(f.width, f.height, f.h);
    const int min_side = 2 * static_cast<int>(std::ceil(params.eps / grid.h)) + 1;
    if (grid.nx < min_side || grid.ny < min_side)
        throw std::invalid_argument("detector: image too small for the given eps");
    RunState s(grid);
    s.f_nodes = image_to_nodes(grid, f, intensity_scale);
    s.mask = make_candidate_mask(grid, params.delta);
    return s;
}

DetectorResult finish(RunState&& s, const Params& params, Trace&& trace, int solves) {
    DetectorResult r{s.grid, std::move(s.edges), std::move(s.u), {}, std::move(trace), solves};
    r.v = edge_indicator(r.edges, params.kappa, r.grid);
    return r;
}

}  // namespace

DetectorResult detect_static(const Image& f, const Params& params,
                             const SolverConfig& solver, double intensity_scale) {
    RunState s = init_state(f, params, intensity_scale);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.grid.element_count());
    const SparseOperator mass = assemble_mass(s.grid);
    const Eigen::VectorXd b = mass * s.f_nodes;
    s.u = solve(assemble(s.grid, ones, params.alpha), b, solver);
    s.j_current = energy_J(s.grid, s.u, ones, s.f_nodes, params.alpha);

    Trace trace;
    accept_strips(s, params, threshold(params), std::numeric_limits<int>::max(), trace);
    return finish(std::move(s), params, std::move(trace), 1);
}

DetectorResult detect_updating(const Image& f, const Params& params,
                               const SolverConfig& solver, double intensity_scale) {
    RunState s = init_state(f, params, intensity_scale);
    const SparseOperator mass = assemble_mass(s.grid);
    const Eigen::VectorXd b = mass * s.f_nodes;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(s.grid.element_count());
    s.u = solve(assemble(s.grid, v, params.alpha), b, solver);
    s.j_current = energy_J(s.grid, s.u, v, s.f_nodes, params.alpha);
    int solves = 1;

    Trace trace;
    const double thresh = threshold(params);
    while (true) {
        const auto [e, gradsq] = argmax_gradient(s);
        if (e < 0 || gradsq < thresh) break;
        accept_strips(s, params, thresh, params.n_max, trace);
        v = edge_indicator(s.edges, params.kappa, s.grid);
        s.u = solve(assemble(s.grid, v, params.alpha), b, solver, &s.u);
        ++solves;
        s.j_current = energy_J(s.grid, s.u, v, s.f_nodes, params.alpha);
        trace.j_eps_after_resolve.push_back(
            s.j_current + 2.0 * params.beta * params.eps *
                              static_cast<int>(s.edges.strips.size()));
    }
    return finish(std::move(s), params, std::move(trace), solves);
}

int choose_nmax(int nx, int ny, double eps, double h, std::optional<int> estimated_strips) {
    double estimate;
    if (estimated_strips) {
        estimate = *estimated_strips;
    } else {
        estimate = 2.0 * (nx + ny) / (2.0 * eps / h);
    }
    return std::max(1, static_cast<int>(std::ceil(estimate / 10.0)));
}

}  // namespace topoedge
