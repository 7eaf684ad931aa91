#include "adaptsde/linear_solver.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace adaptsde {

namespace {
std::string singular_message(double h, double rcond)
{
    std::ostringstream os;
    os << "I - h A is singular or ill-conditioned at h=" << h << " (rcond estimate " << rcond
       << ")";
    return os.str();
}
}  // namespace

SingularSystemError::SingularSystemError(double h, double rcond)
    : std::runtime_error(singular_message(h, rcond)), h_(h), rcond_(rcond)
{
}

Vector thomas_solve(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper, const Vector& rhs)
{
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || static_cast<std::size_t>(rhs.size()) != n)
        throw std::invalid_argument("thomas_solve: size mismatch");
    if (n == 0) return Vector{};

    std::vector<double> c(n);
    Vector x(static_cast<Eigen::Index>(n));
    double pivot = diag[0];
    if (pivot == 0.0) throw std::domain_error("thomas_solve: zero pivot");
    c[0] = upper[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) throw std::domain_error("thomas_solve: zero pivot");
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

ShiftedSolver::ShiftedSolver(const Matrix& A, Structure structure)
    : A_(A), structure_(structure)
{
    if (A.rows() != A.cols()) throw std::invalid_argument("ShiftedSolver: A must be square");
    if (!structure_consistent(A, structure))
        throw std::invalid_argument("ShiftedSolver: A does not match structure " + to_string(structure));
    const auto n = A.rows();
    diag_ = A.diagonal();
    if (structure == Structure::tridiagonal) {
        lower_ = Vector::Zero(n);
        upper_ = Vector::Zero(n);
        for (Eigen::Index i = 1; i < n; ++i) lower_[i] = A(i, i - 1);
        for (Eigen::Index i = 0; i + 1 < n; ++i) upper_[i] = A(i, i + 1);
    }
}

const Eigen::PartialPivLU<Matrix>& ShiftedSolver::factor(double h)
{
    const auto key = std::bit_cast<std::uint64_t>(h);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Matrix M = Matrix::Identity(A_.rows(), A_.cols()) - h * A_;
    Eigen::PartialPivLU<Matrix> lu(M);
    const double rc = lu.rcond();
    if (!(rc >= min_rcond)) throw SingularSystemError(h, rc);
    return cache_.emplace(key, std::move(lu)).first->second;
}

Vector ShiftedSolver::solve(double h, const Vector& rhs)
{
    if (rhs.size() != A_.rows()) throw std::invalid_argument("ShiftedSolver: rhs size mismatch");
    switch (structure_) {
    case Structure::scalar:
    case Structure::diagonal: {
        Vector x(rhs.size());
        for (Eigen::Index i = 0; i < rhs.size(); ++i) {
            const double p = 1.0 - h * diag_[i];
            if (p == 0.0) throw SingularSystemError(h, 0.0);
            x[i] = rhs[i] / p;
        }
        return x;
    }
    case Structure::tridiagonal: {
        const auto n = static_cast<std::size_t>(rhs.size());
        std::vector<double> lo(n), di(n), up(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = -h * lower_[i];
            di[i] = 1.0 - h * diag_[i];
            up[i] = -h * upper_[i];
        }
        try {
            return thomas_solve(lo, di, up, rhs);
        } catch (const std::domain_error&) {
            throw SingularSystemError(h, 0.0);
        }
    }
    case Structure::dense: return factor(h).solve(rhs);
    }
    return {};
}

}  // namespace adaptsde
