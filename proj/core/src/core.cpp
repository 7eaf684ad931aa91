#include "adaptsde/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <sstream>

namespace adaptsde {

std::string to_string(Structure s)
{
    switch (s) {
    case Structure::dense: return "dense";
    case Structure::tridiagonal: return "tridiagonal";
    case Structure::diagonal: return "diagonal";
    case Structure::scalar: return "scalar";
    }
    return "unknown";
}

bool structure_consistent(const Matrix& A, Structure hint)
{
    const auto n = A.rows();
    if (A.cols() != n) return false;
    switch (hint) {
    case Structure::dense: return true;
    case Structure::scalar: return n == 1;
    case Structure::diagonal:
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j && A(i, j) != 0.0) return false;
        return true;
    case Structure::tridiagonal:
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (std::abs(i - j) > 1 && A(i, j) != 0.0) return false;
        return true;
    }
    return false;
}

void check_problem(const SdeProblem& p)
{
    if (p.d < 1 || p.m < 1) throw std::invalid_argument(p.name + ": d and m must be positive");
    if (p.A.rows() != p.d || p.A.cols() != p.d)
        throw std::invalid_argument(p.name + ": A must be d x d");
    if (p.x0.size() != p.d) throw std::invalid_argument(p.name + ": x0 must have d entries");
    if (!p.f || !p.g) throw std::invalid_argument(p.name + ": drift and diffusion are required");
    if (!(p.t_end > 0.0)) throw std::invalid_argument(p.name + ": t_end must be positive");
    if (!structure_consistent(p.A, p.structure))
        throw std::invalid_argument(p.name + ": A does not match structure hint "
                                    + to_string(p.structure));
    const Matrix g0 = p.g(p.x0);
    if (g0.rows() != p.d || g0.cols() != p.m)
        throw std::invalid_argument(p.name + ": g(x) must be d x m");
    if (p.f(p.x0).size() != p.d) throw std::invalid_argument(p.name + ": f(x) must have d entries");
}

MeshConfig::MeshConfig(double h_max, double rho) : h_max_(h_max), rho_(rho)
{
    if (!(h_max > 0.0) || h_max > 1.0)
        throw std::invalid_argument("h_max must lie in (0, 1]");
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be >= 1");
}

std::vector<double> mesh_times(const std::vector<StepRecord>& mesh, double t_end)
{
    std::vector<double> times;
    times.reserve(mesh.size() + 1);
    for (const auto& r : mesh) times.push_back(r.t_start);
    times.push_back(t_end);
    return times;
}

namespace {

using CMatrix = Eigen::MatrixXcd;

double spectral_norm(const CMatrix& M)
{
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
}

// Denman-Beavers iteration for the principal square root.
std::optional<CMatrix> principal_sqrt(const Matrix& A, double tol, int max_iter)
{
    const auto n = A.rows();
    CMatrix Y = A.cast<std::complex<double>>();
    CMatrix Z = CMatrix::Identity(n, n);
    for (int k = 0; k < max_iter; ++k) {
        Eigen::PartialPivLU<CMatrix> luY(Y), luZ(Z);
        if (std::abs(luY.determinant()) == 0.0 || std::abs(luZ.determinant()) == 0.0)
            return std::nullopt;
        CMatrix Yn = 0.5 * (Y + luZ.inverse());
        CMatrix Zn = 0.5 * (Z + luY.inverse());
        if (!Yn.allFinite() || !Zn.allFinite()) return std::nullopt;
        const double change = (Yn - Y).norm();
        Y = std::move(Yn);
        Z = std::move(Zn);
        if (change <= tol * std::max(1.0, Y.norm())) {
            CMatrix A_c = A.cast<std::complex<double>>();
            if ((Y * Y - A_c).norm() <= 1e-8 * std::max(1.0, A.norm())) return Y;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

HmaxBoundReport validate_hmax_bound(const SdeProblem& problem, const MeshConfig& config,
                                    double delta)
{
    if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta must lie in [0, 1]");
    HmaxBoundReport report;
    const Matrix& A = problem.A;
    const double h = config.h_max();

    Eigen::JacobiSVD<Matrix> svd(A);
    const double a_norm = A.size() ? svd.singularValues()(0) : 0.0;
    report.norm_sq = a_norm * a_norm;

    if (A.isApprox(A.transpose(), 1e-14) || A.isZero()) {
        // ||A^{1/2}||^2 = max |lambda| for symmetric A.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
        report.sqrt_norm_sq = A.size() ? eig.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
    } else {
        auto root = principal_sqrt(A, 1e-12, 100);
        if (!root) {
            report.verdict = BoundVerdict::indeterminate;
            report.diagnostic = "warning: matrix square root iteration did not converge";
            return report;
        }
        const double s = spectral_norm(*root);
        report.sqrt_norm_sq = s * s;
    }

    report.lhs = h * (report.sqrt_norm_sq + (1.0 + h / 2.0) * report.norm_sq);
    const bool ok = report.lhs <= 1.0 - delta;
    report.verdict = ok ? BoundVerdict::holds : BoundVerdict::violated;
    std::ostringstream msg;
    msg << "h_max bound lhs=" << report.lhs << (ok ? " <= " : " > ") << (1.0 - delta);
    if (!ok) msg << " (warning: proceeding anyway)";
    report.diagnostic = msg.str();
    return report;
}

double terminal_error(const Vector& y, const Vector& x_ref)
{
    if (y.size() != x_ref.size())
        throw std::invalid_argument("terminal_error: dimension mismatch");
    return (y - x_ref).squaredNorm();
}

}  // namespace adaptsde
