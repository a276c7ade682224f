#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "topoedge/grid.hpp"

namespace topoedge {

/// Oriented line segment of half-length eps with a thin covering strip of
/// half-width eps^2 around it.
struct Strip {
    Eigen::Vector2d center;
    Eigen::Vector2d tangent;  // unit
    Eigen::Vector2d normal;   // unit, perpendicular to tangent
    double half_length = 0.0;
    double half_width = 0.0;  // continuous model value eps^2
};

/// Strip centered at y whose normal points along the gradient g.
Strip make_strip(const Eigen::Vector2d& y, const Eigen::Vector2d& g, double eps);

/// Distance from a point to the segment underlying the strip.
double segment_distance(const Strip& strip, const Eigen::Vector2d& p);

/// Elements whose midpoint lies within `radius` of the segment, in increasing
/// row-major element order.
std::vector<int> rasterize_elements(const Strip& strip, const Grid& grid, double radius);

/// Detector rasterization: half-width floored at h/2 so the strip always
/// flips at least a one-element-thick band of the diffusivity.
inline std::vector<int> rasterize_strip(const Strip& strip, const Grid& grid) {
    return rasterize_elements(strip, grid, std::max(strip.half_width, grid.h / 2.0));
}

/// Continuum-width rasterization used by the asymptotic validation runs.
inline std::vector<int> rasterize_strip_exact(const Strip& strip, const Grid& grid) {
    return rasterize_elements(strip, grid, strip.half_width);
}

/// Enlargement rectangle S: midpoints within distance delta of the segment and
/// within half-length eps of the center along the tangent.
std::vector<int> enlargement(const Strip& strip, double delta, const Grid& grid);

/// Union of accepted strips plus the element set they cover.
struct EdgeSet {
    std::vector<Strip> strips;
    std::vector<std::uint8_t> covered;  // per element
    int covered_count = 0;

    explicit EdgeSet(const Grid& grid) : covered(grid.element_count(), 0) {}

    /// Adds a strip; returns the covered elements that were new.
    std::vector<int> add(const Strip& strip, const std::vector<int>& raster);
};

/// Writes one `cx cy tx ty eps` line per strip.
void write_strips(const EdgeSet& edges, std::ostream& out);

/// Admissible-element mask L.
struct CandidateMask {
    std::vector<std::uint8_t> admissible;
    int count = 0;
};

/// Initial mask: every element whose midpoint is within distance delta of the
/// domain boundary is excluded.
CandidateMask make_candidate_mask(const Grid& grid, double delta);

void exclude(CandidateMask& mask, const std::vector<int>& elements);

/// v_K: kappa on covered elements, 1 elsewhere.
Eigen::VectorXd edge_indicator(const EdgeSet& edges, double kappa, const Grid& grid);

}  // namespace topoedge
