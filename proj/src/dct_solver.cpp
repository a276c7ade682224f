#include "topoedge/dct_solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>

#include "topoedge/fem.hpp"

namespace topoedge {

StencilOperator::StencilOperator(const Grid& grid, double c_mass, double c_diff, double kappa,
                                 std::vector<int> strip_elements)
    : grid_(grid),
      c_mass_(c_mass),
      c_diff_(c_diff),
      kappa_(kappa),
      strip_elements_(std::move(strip_elements)) {
    const double h = grid.h;
    const double m1[3] = {h / 6.0, 4.0 * h / 6.0, h / 6.0};
    const double k1[3] = {-1.0 / h, 2.0 / h, -1.0 / h};
    for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx)
            w_[dy][dx] = c_mass * m1[dy] * m1[dx] +
                         c_diff * (k1[dy] * m1[dx] + m1[dy] * k1[dx]);
}

void StencilOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const int stride = nx + 1;
    y.resize(x.size());
    for (int j = 0; j <= ny; ++j) {
        const int jm = j == 0 ? 1 : j - 1;
        const int jp = j == ny ? ny - 1 : j + 1;
        const double sy = (j == 0 || j == ny) ? 0.5 : 1.0;
        const double* rm = x.data() + jm * stride;
        const double* r0 = x.data() + j * stride;
        const double* rp = x.data() + jp * stride;
        double* out = y.data() + j * stride;
        for (int i = 0; i <= nx; ++i) {
            const int im = i == 0 ? 1 : i - 1;
            const int ip = i == nx ? nx - 1 : i + 1;
            const double sx = (i == 0 || i == nx) ? 0.5 : 1.0;
            out[i] = sy * sx *
                     (w_[0][0] * rm[im] + w_[0][1] * rm[i] + w_[0][2] * rm[ip] +
                      w_[1][0] * r0[im] + w_[1][1] * r0[i] + w_[1][2] * r0[ip] +
                      w_[2][0] * rp[im] + w_[2][1] * rp[i] + w_[2][2] * rp[ip]);
        }
    }
    if (strip_elements_.empty()) return;
    const Eigen::Matrix4d& Ke = element_stiffness();
    const double factor = c_diff_ * (1.0 - kappa_);
    for (int e : strip_elements_) {
        const auto n = grid_.element_nodes(e);
        Eigen::Vector4d xe;
        for (int a = 0; a < 4; ++a) xe[a] = x[n[a]];
        const Eigen::Vector4d corr = factor * (Ke * xe);
        for (int a = 0; a < 4; ++a) y[n[a]] -= corr[a];
    }
}

struct DctPreconditioner::Impl {
    Grid grid;
    fftw_plan plan = nullptr;
    double* buf = nullptr;
    Eigen::VectorXd inv_denom;

    ~Impl() {
        if (plan) fftw_destroy_plan(plan);
        if (buf) fftw_free(buf);
    }
};

DctPreconditioner::DctPreconditioner(const Grid& grid, double c_mass, double c_diff)
    : impl_(std::make_unique<Impl>()) {
    impl_->grid = grid;
    const int nx = grid.nx, ny = grid.ny;
    const size_t n = static_cast<size_t>(nx + 1) * (ny + 1);
    impl_->buf = fftw_alloc_real(n);
    impl_->plan = fftw_plan_r2r_2d(ny + 1, nx + 1, impl_->buf, impl_->buf, FFTW_REDFT00,
                                   FFTW_REDFT00, FFTW_ESTIMATE);
    if (!impl_->plan) throw std::runtime_error("DctPreconditioner: FFTW plan failed");

    const double h = grid.h;
    auto mass_eig = [&](int k, int n1d) {
        return h * (2.0 + std::cos(M_PI * k / n1d)) / 3.0;
    };
    auto stiff_eig = [&](int k, int n1d) {
        return (2.0 - 2.0 * std::cos(M_PI * k / n1d)) / h;
    };
    const double roundtrip = 4.0 * nx * ny;  // REDFT00 applied twice per dim
    impl_->inv_denom.resize(static_cast<Eigen::Index>(n));
    for (int ky = 0; ky <= ny; ++ky) {
        for (int kx = 0; kx <= nx; ++kx) {
            const double lmx = mass_eig(kx, nx), lmy = mass_eig(ky, ny);
            const double lkx = stiff_eig(kx, nx), lky = stiff_eig(ky, ny);
            const double denom = c_mass * lmx * lmy + c_diff * (lkx * lmy + lmx * lky);
            impl_->inv_denom[ky * (nx + 1) + kx] =
                denom > 1e-300 ? 1.0 / (denom * roundtrip) : 0.0;
        }
    }
}

DctPreconditioner::~DctPreconditioner() = default;

void DctPreconditioner::apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
    const Grid& grid = impl_->grid;
    const int nx = grid.nx, ny = grid.ny;
    const int stride = nx + 1;
    double* buf = impl_->buf;
    // Undo the half-weighting of boundary rows before diagonalizing.
    for (int j = 0; j <= ny; ++j) {
        const double sy = (j == 0 || j == ny) ? 2.0 : 1.0;
        for (int i = 0; i <= nx; ++i) {
            const double sx = (i == 0 || i == nx) ? 2.0 : 1.0;
            buf[j * stride + i] = sy * sx * r[j * stride + i];
        }
    }
    fftw_execute(impl_->plan);
    const double* inv = impl_->inv_denom.data();
    const size_t n = static_cast<size_t>(stride) * (ny + 1);
    for (size_t k = 0; k < n; ++k) buf[k] *= inv[k];
    fftw_execute(impl_->plan);
    z.resize(static_cast<Eigen::Index>(n));
    std::copy(buf, buf + n, z.data());
}

namespace {

void remove_mean(Eigen::VectorXd& x) { x.array() -= x.mean(); }

}  // namespace

PcgResult solve_pcg(const StencilOperator& op, const DctPreconditioner& precond,
                    const Eigen::VectorXd& b, double tol, int maxit,
                    const Eigen::VectorXd* guess, bool project_constants) {
    PcgResult result;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        result.x = Eigen::VectorXd::Zero(b.size());
        result.converged = true;
        return result;
    }
    Eigen::VectorXd x = guess ? *guess : Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r(b.size()), z(b.size()), p(b.size()), ap(b.size());
    op.apply(x, r);
    r = b - r;
    if (project_constants) remove_mean(r);
    double rz_old = 0.0;
    for (int it = 0; it < maxit; ++it) {
        precond.apply(r, z);
        if (project_constants) remove_mean(z);
        const double rz = r.dot(z);
        if (it == 0) {
            p = z;
        } else {
            p = z + (rz / rz_old) * p;
        }
        rz_old = rz;
        op.apply(p, ap);
        const double pap = p.dot(ap);
        if (pap <= 0.0) break;  // breakdown
        const double step = rz / pap;
        x += step * p;
        r -= step * ap;
        if (project_constants) remove_mean(r);
        result.iterations = it + 1;
        result.relative_residual = r.norm() / bnorm;
        if (result.relative_residual <= tol) {
            result.converged = true;
            break;
        }
    }
    if (result.iterations == 0) result.relative_residual = r.norm() / bnorm;
    result.x = std::move(x);
    return result;
}

}  // namespace topoedge
