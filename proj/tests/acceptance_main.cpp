// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Heavier checks (expansion convergence, polarization eigenvalues)
// run at the end.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "topoedge/detector.hpp"
#include "topoedge/validation.hpp"

namespace fs = std::filesystem;
using namespace topoedge;

namespace {

Image step_image(int size, double high = 1.0) {
    Image f(size, size, 1.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) f.at(x, y) = x < size / 2 ? 0.0 : high;
    return f;
}

Image diagonal_image(int size) {
    Image f(size, size, 1.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) f.at(x, y) = x + y < size ? 0.0 : 1.0;
    return f;
}

Params reference_params() {
    Params p;
    p.alpha = 8.0;
    p.beta = 150.0;
    p.eps = 3.0;
    p.kappa = 0.1;
    p.delta = 2.0;
    p.n_max = 5;
    return p;
}

// --- 1. two-solve energy identity on random strips ---------------------------

bool criterion_identity(std::string& detail) {
    const int size = 64;
    const Image f = step_image(size);
    const Grid grid(size, size, 1.0);
    const Params p = reference_params();
    const SolverConfig solver{1e-10, 0};

    EdgeSet k_empty(grid);
    EdgeSet k_distant(grid);
    const Strip distant = make_strip({size * 0.25, size * 0.75}, {0.0, 1.0}, p.eps);
    k_distant.add(distant, rasterize_strip(distant, grid));

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> pos(p.eps + p.delta + 1.0,
                                               size - p.eps - p.delta - 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const EdgeSet& K = t % 2 ? k_distant : k_empty;
        double res = -1.0;
        while (res < 0.0) {
            const double a = angle(rng);
            const Strip s =
                make_strip({pos(rng), pos(rng)}, {std::cos(a), std::sin(a)}, p.eps);
            try {
                res = check_energy_identity(f, K, s, p, solver, 255.0);
            } catch (const std::invalid_argument&) {
                res = -1.0;  // overlapped the distant strip; redraw
            }
        }
        worst = std::max(worst, res);
    }
    std::ostringstream os;
    os << "max relative residual " << worst << " over 20 strips (limit 1e-6)";
    detail = os.str();
    return worst < 1e-6;
}

// --- 2. O(eps^3) expansion convergence ---------------------------------------

bool criterion_expansion(std::string& detail) {
    Params p;
    p.alpha = 1.0;
    p.kappa = 0.5;
    auto f = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
    const double px = 0.3, py = 0.4;
    const Eigen::Vector2d g(M_PI * std::cos(M_PI * px) * std::sin(M_PI * py),
                            M_PI * std::sin(M_PI * px) * std::cos(M_PI * py));
    const Eigen::Vector2d tau = Eigen::Vector2d(-g.y(), g.x()).normalized();

    const ExpansionReport r =
        verify_expansion(f, {px, py}, tau, {0.05, 0.025, 0.0125}, p, {1e-10, 0});

    bool monotone = true;
    for (size_t k = 1; k < r.rows.size(); ++k)
        monotone = monotone &&
                   r.rows[k].residual_over_eps3 < r.rows[k - 1].residual_over_eps3;
    const double ratio = r.rows.back().ratio;
    std::ostringstream os;
    os << "residual/eps^3:";
    for (const ExpansionRow& row : r.rows) os << " " << row.residual_over_eps3;
    os << (monotone ? " (monotone)" : " (NOT monotone)") << ", final ratio " << ratio
       << " (limits [0.8, 1.2])";
    detail = os.str();
    return monotone && ratio >= 0.8 && ratio <= 1.2;
}

// --- 3. polarization eigenvalues ---------------------------------------------

bool criterion_polarization(std::string& detail) {
    const double kappa = 0.1;
    const int n = 512;
    const std::vector<double> eps_list = {0.12, 0.08, 0.06, 0.045};
    const double slack = 0.05;

    bool ok = true;
    std::ostringstream os;
    TensorEstimate last;
    for (double eps : eps_list) {
        last = estimate_polarization_pair(eps, kappa, n, {1e-10, 0});
        const bool inside = last.m_tt >= 1.0 - slack &&
                            last.m_tt <= (1.0 / kappa) * (1.0 + slack) &&
                            last.m_nn >= 1.0 - slack &&
                            last.m_nn <= (1.0 / kappa) * (1.0 + slack);
        ok = ok && inside;
        os << " eps=" << eps << ": m_tt=" << last.m_tt << " m_nn=" << last.m_nn
           << (inside ? "" : " (outside [1, 1/kappa] + 5%)");
    }
    const bool tight = last.m_tt >= 0.9 && last.m_tt <= 1.1 &&
                       last.m_nn >= 0.8 / kappa && last.m_nn <= 1.1 / kappa;
    ok = ok && tight;
    os << "; smallest eps targets: m_tt in [0.9, 1.1], m_nn in [8, 11]"
       << (tight ? " met" : " MISSED");
    if (!tight) {
        // The strip is 2 eps long and 2 eps^2 wide; at finite aspect ratio the
        // normal response follows ~1/(kappa + (1-kappa) eps/(1+eps)), which is
        // about 7.2 at the smallest eps this grid can represent (eps^2 >= h
        // forces eps >= 0.0442), so the 1/kappa limit is out of reach here.
        os << " -- finite-aspect-ratio ceiling ~"
           << 1.0 / (kappa + (1.0 - kappa) * 0.045 / 1.045)
           << " at the smallest representable eps; refining the grid at fixed eps"
              " converges to that ceiling, not to 1/kappa";
    }
    detail = os.str();
    return ok;
}

// --- 4. stop test ------------------------------------------------------------

bool criterion_stop_test(std::string& detail) {
    const Params p = reference_params();
    bool ok = true;
    std::ostringstream os;
    for (int size : {16, 33, 64}) {
        Image c(size, size, 1.0);
        for (double& v : c.data) v = 0.5;
        const DetectorResult rs = detect_static(c, p, {}, 255.0);
        const DetectorResult ru = detect_updating(c, p, {}, 255.0);
        if (!rs.edges.strips.empty() || !ru.edges.strips.empty()) {
            ok = false;
            os << " constant " << size << "x" << size << " produced strips;";
        }
    }

    // Scale a unit step so the peak gradient energy sits 10x above threshold.
    const int size = 64;
    const Image f = step_image(size);
    const Grid grid(size, size, 1.0);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.element_count());
    const Eigen::VectorXd u =
        solve(assemble(grid, ones, p.alpha), project_rhs(grid, f), {1e-12, 0});
    const CandidateMask mask = make_candidate_mask(grid, p.delta);
    double max_gradsq = 0.0;
    for (int e = 0; e < grid.element_count(); ++e)
        if (mask.admissible[e])
            max_gradsq = std::max(max_gradsq, element_gradient(grid, u, e).squaredNorm());
    const double scale = std::sqrt(10.0 * threshold(p) / max_gradsq);
    const DetectorResult r = detect_static(f, p, {}, scale);
    if (r.edges.strips.empty()) {
        ok = false;
        os << " 10x-threshold step produced no strips;";
    } else {
        os << " constants: 0 strips; 10x-threshold step: " << r.edges.strips.size()
           << " strips";
    }
    detail = os.str();
    return ok;
}

// --- 5. orientation soundness ------------------------------------------------

bool criterion_orientation(std::string& detail) {
    const Image f = step_image(64);
    const Params p = reference_params();
    const DetectorResult r = detect_static(f, p, {}, 255.0);
    if (r.edges.strips.empty()) {
        detail = "no strips accepted";
        return false;
    }
    const double cos10 = std::cos(10.0 * M_PI / 180.0);
    int vertical = 0;
    bool perp_ok = true;
    for (const Strip& s : r.edges.strips) {
        if (std::abs(s.tangent.y()) > cos10) ++vertical;
        const int ei = static_cast<int>(s.center.x());
        const int ej = static_cast<int>(s.center.y());
        const Eigen::Vector2d g =
            element_gradient(r.grid, r.u, r.grid.element_index(ei, ej));
        perp_ok = perp_ok && std::abs(s.tangent.dot(g)) <= 1e-10 * g.norm();
    }
    const double frac = static_cast<double>(vertical) / r.edges.strips.size();
    std::ostringstream os;
    os << vertical << "/" << r.edges.strips.size() << " strips within 10 deg of vertical ("
       << 100.0 * frac << "%, need >= 90%), tangents "
       << (perp_ok ? "perpendicular" : "NOT perpendicular") << " to the solved gradient";
    detail = os.str();
    return frac >= 0.9 && perp_ok;
}

// --- 6. updating algorithm reduces to the static one -------------------------

bool criterion_reduction(std::string& detail) {
    Params p = reference_params();
    bool ok = true;
    std::ostringstream os;
    int images = 0;
    for (const Image& f : {step_image(64), diagonal_image(64), step_image(48, 0.7)}) {
        p.n_max = 1;
        const DetectorResult s = detect_static(f, p, {}, 255.0);
        p.n_max = 1000000;
        const DetectorResult u = detect_updating(f, p, {}, 255.0);
        bool same = s.edges.strips.size() == u.edges.strips.size();
        for (size_t k = 0; same && k < s.edges.strips.size(); ++k)
            same = s.edges.strips[k].center == u.edges.strips[k].center &&
                   s.edges.strips[k].tangent == u.edges.strips[k].tangent;
        if (!same) {
            ok = false;
            os << " image " << images << " sequences differ;";
        }
        ++images;
    }
    if (ok) os << "identical strip sequences on " << images << " test images";
    detail = os.str();
    return ok;
}

// --- 7. determinism of the CLI -----------------------------------------------

bool files_equal(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool criterion_determinism(std::string& detail) {
    const fs::path dir = fs::path("acceptance_tmp");
    fs::remove_all(dir);
    fs::create_directories(dir);

    const Image f = step_image(64);
    std::vector<std::uint8_t> bytes(f.data.size());
    for (size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>(std::lround(f.data[i] * 255.0));
    const fs::path input = dir / "step.pgm";
    save_pgm8(bytes, f.width, f.height, input.string());

    const std::string cli = TOPOEDGE_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null";
        return std::system(cmd.c_str()) == 0;
    };

    bool ok = true;
    std::ostringstream os;
    for (int i = 1; i <= 2; ++i)
        ok = ok && run("detect-update " + input.string() + " -o " +
                       (dir / ("d" + std::to_string(i))).string());
    for (const char* name : {"edges.pgm", "smooth.pgm", "overlay.pgm", "strips.txt",
                             "trace.csv"})
        if (ok && !files_equal(dir / "d1" / name, dir / "d2" / name)) {
            ok = false;
            os << " detect output " << name << " differs;";
        }

    for (int i = 1; i <= 2; ++i)
        ok = ok && run("validate-identity --size 32 --trials 4 -o " +
                       (dir / ("v" + std::to_string(i))).string());
    if (ok && !files_equal(dir / "v1" / "identity.csv", dir / "v2" / "identity.csv")) {
        ok = false;
        os << " identity.csv differs;";
    }
    if (ok) os << "repeated detect-update and validate-identity runs byte-identical";
    if (os.str().empty()) os << "CLI invocation failed";
    detail = os.str();
    fs::remove_all(dir);
    return ok;
}

// --- 8. small-instance solver oracle -----------------------------------------

bool criterion_solver_oracle(std::string& detail) {
    const Grid grid(8, 8, 1.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> intensity(0.0, 1.0), alpha_d(0.5, 8.0),
        kappa_d(0.05, 1.0);
    std::bernoulli_distribution flip(0.3);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        Image f(8, 8);
        for (double& v : f.data) v = intensity(rng);
        Eigen::VectorXd v(grid.element_count());
        const double kappa = kappa_d(rng);
        for (int e = 0; e < v.size(); ++e) v[e] = flip(rng) ? kappa : 1.0;
        const SparseOperator A = assemble(grid, v, alpha_d(rng));
        const Eigen::VectorXd b = project_rhs(grid, f);
        const Eigen::VectorXd u = solve(A, b, {1e-12, 0});
        const Eigen::VectorXd u_dense = Eigen::MatrixXd(A).fullPivLu().solve(b);
        worst = std::max(worst, (u - u_dense).norm() / u_dense.norm());
    }
    std::ostringstream os;
    os << "max relative error vs dense LU " << worst << " over 50 instances (limit 1e-8)";
    detail = os.str();
    return worst < 1e-8;
}

// --- 9. exclusion geometry ---------------------------------------------------

bool criterion_exclusion(std::string& detail) {
    const Grid grid(64, 64, 1.0 / 64);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> pos(-0.2, 1.2), angle(0.0, 2.0 * M_PI),
        len(0.01, 0.2);
    int mismatches = 0;
    for (int t = 0; t < 1000; ++t) {
        const double a = angle(rng);
        const Strip s =
            make_strip({pos(rng), pos(rng)}, {std::cos(a), std::sin(a)}, len(rng));
        const double delta = s.half_length * 2.0 / 3.0;

        std::vector<int> raster_oracle, enlarge_oracle;
        const double radius = std::max(s.half_width, grid.h / 2);
        for (int e = 0; e < grid.element_count(); ++e) {
            const Eigen::Vector2d mid = grid.element_midpoint(e);
            const double d = segment_distance(s, mid);
            if (d <= radius) raster_oracle.push_back(e);
            if (d <= delta &&
                std::abs((mid - s.center).dot(s.tangent)) <= s.half_length)
                enlarge_oracle.push_back(e);
        }
        if (rasterize_strip(s, grid) != raster_oracle ||
            enlargement(s, delta, grid) != enlarge_oracle)
            ++mismatches;
    }
    std::ostringstream os;
    os << mismatches << " mismatches vs brute-force midpoint scan over 1000 strips";
    detail = os.str();
    return mismatches == 0;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Criterion criteria[] = {
        {"1 energy identity", criterion_identity},
        {"4 stop test", criterion_stop_test},
        {"5 orientation soundness", criterion_orientation},
        {"6 algorithm reduction", criterion_reduction},
        {"7 determinism", criterion_determinism},
        {"8 solver oracle", criterion_solver_oracle},
        {"9 exclusion geometry", criterion_exclusion},
        {"3 polarization eigenvalues", criterion_polarization},
        {"2 expansion convergence", criterion_expansion},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.name << ": " << detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
