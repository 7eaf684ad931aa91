#pragma once

#include "adaptsde/core.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>

namespace adaptsde {

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(double h, double rcond);
    double step() const { return h_; }
    double rcond() const { return rcond_; }

private:
    double h_;
    double rcond_;
};

/// Solves the tridiagonal system with sub-diagonal `lower` (entries 1..n-1),
/// diagonal `diag` and super-diagonal `upper` (entries 0..n-2) by the Thomas
/// algorithm. `lower[0]` and `upper[n-1]` are ignored. Throws
/// std::domain_error on a zero pivot.
Vector thomas_solve(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper, const Vector& rhs);

/// Solver for (I - h A) x = b, dispatched on the structure of A.
///
/// Dense factorizations are cached by the exact bit pattern of h, so an
/// adaptive run pays one LU per distinct step size. Not thread-safe; use
/// one instance per worker.
class ShiftedSolver {
public:
    ShiftedSolver(const Matrix& A, Structure structure);

    Vector solve(double h, const Vector& rhs);

    std::size_t cached_factorizations() const { return cache_.size(); }

    /// Factorizations below this reciprocal condition estimate are rejected.
    static constexpr double min_rcond = 1e-14;

private:
    const Eigen::PartialPivLU<Matrix>& factor(double h);

    Matrix A_;
    Structure structure_;
    Vector diag_, lower_, upper_;
    std::unordered_map<std::uint64_t, Eigen::PartialPivLU<Matrix>> cache_;
};

}  // namespace adaptsde
