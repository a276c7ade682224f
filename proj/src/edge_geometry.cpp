#include "topoedge/edge_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace topoedge {

Strip make_strip(const Eigen::Vector2d& y, const Eigen::Vector2d& g, double eps) {
    const double norm = g.norm();
    if (norm <= 0.0) throw std::invalid_argument("make_strip: zero gradient");
    if (eps <= 0.0) throw std::invalid_argument("make_strip: eps must be positive");
    Strip s;
    s.center = y;
    s.normal = g / norm;
    s.tangent = Eigen::Vector2d(-s.normal.y(), s.normal.x());
    s.half_length = eps;
    s.half_width = eps * eps;
    return s;
}

double segment_distance(const Strip& strip, const Eigen::Vector2d& p) {
    const Eigen::Vector2d d = p - strip.center;
    const double rho = std::clamp(d.dot(strip.tangent), -strip.half_length, strip.half_length);
    return (d - rho * strip.tangent).norm();
}

namespace {

// Element index range whose midpoints can lie inside [lo, hi] along one axis.
std::pair<int, int> midpoint_range(double lo, double hi, double h, int n) {
    int first = static_cast<int>(std::floor(lo / h - 0.5));
    int last = static_cast<int>(std::ceil(hi / h - 0.5));
    return {std::max(0, first), std::min(n - 1, last)};
}

}  // namespace

std::vector<int> rasterize_elements(const Strip& strip, const Grid& grid, double radius) {
    const Eigen::Vector2d a = strip.center - strip.half_length * strip.tangent;
    const Eigen::Vector2d b = strip.center + strip.half_length * strip.tangent;
    const auto [i0, i1] = midpoint_range(std::min(a.x(), b.x()) - radius,
                                         std::max(a.x(), b.x()) + radius, grid.h, grid.nx);
    const auto [j0, j1] = midpoint_range(std::min(a.y(), b.y()) - radius,
                                         std::max(a.y(), b.y()) + radius, grid.h, grid.ny);
    std::vector<int> out;
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            if (segment_distance(strip, grid.element_midpoint(i, j)) <= radius)
                out.push_back(grid.element_index(i, j));
        }
    }
    return out;
}

std::vector<int> enlargement(const Strip& strip, double delta, const Grid& grid) {
    if (delta <= 0.0 || delta >= strip.half_length)
        throw std::invalid_argument("enlargement: need 0 < delta < eps");
    const double reach = strip.half_length + delta;
    const auto [i0, i1] = midpoint_range(strip.center.x() - reach, strip.center.x() + reach,
                                         grid.h, grid.nx);
    const auto [j0, j1] = midpoint_range(strip.center.y() - reach, strip.center.y() + reach,
                                         grid.h, grid.ny);
    std::vector<int> out;
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            const Eigen::Vector2d mid = grid.element_midpoint(i, j);
            if (segment_distance(strip, mid) <= delta &&
                std::abs((mid - strip.center).dot(strip.tangent)) <= strip.half_length)
                out.push_back(grid.element_index(i, j));
        }
    }
    return out;
}

std::vector<int> EdgeSet::add(const Strip& strip, const std::vector<int>& raster) {
    strips.push_back(strip);
    std::vector<int> fresh;
    for (int e : raster) {
        if (!covered[e]) {
            covered[e] = 1;
            ++covered_count;
            fresh.push_back(e);
        }
    }
    return fresh;
}

void write_strips(const EdgeSet& edges, std::ostream& out) {
    out.precision(17);
    for (const Strip& s : edges.strips) {
        out << s.center.x() << " " << s.center.y() << " " << s.tangent.x() << " "
            << s.tangent.y() << " " << s.half_length << "\n";
    }
}

CandidateMask make_candidate_mask(const Grid& grid, double delta) {
    CandidateMask mask;
    mask.admissible.assign(grid.element_count(), 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Eigen::Vector2d mid = grid.element_midpoint(i, j);
            const double boundary_dist =
                std::min(std::min(mid.x(), grid.width() - mid.x()),
                         std::min(mid.y(), grid.height() - mid.y()));
            if (boundary_dist > delta) {
                mask.admissible[grid.element_index(i, j)] = 1;
                ++mask.count;
            }
        }
    }
    return mask;
}

void exclude(CandidateMask& mask, const std::vector<int>& elements) {
    for (int e : elements) {
        if (mask.admissible[e]) {
            mask.admissible[e] = 0;
            --mask.count;
        }
    }
}

Eigen::VectorXd edge_indicator(const EdgeSet& edges, double kappa, const Grid& grid) {
    if (kappa <= 0.0 || kappa >= 1.0)
        throw std::invalid_argument("edge_indicator: kappa must lie in (0,1)");
    Eigen::VectorXd v = Eigen::VectorXd::Ones(grid.element_count());
    for (int e = 0; e < grid.element_count(); ++e)
        if (edges.covered[e]) v[e] = kappa;
    return v;
}

}  // namespace topoedge
