#include "adaptsde/linear_solver.hpp"
#include "adaptsde/problems.hpp"

#include <doctest.h>

#include <random>

using namespace adaptsde;

namespace {
double relative_residual(const Matrix& A, double h, const Vector& x, const Vector& b)
{
    const Matrix M = Matrix::Identity(A.rows(), A.cols()) - h * A;
    return (M * x - b).norm() / b.norm();
}
}  // namespace

TEST_CASE("Thomas algorithm matches dense LU")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1u, 2u, 5u, 64u}) {
        std::vector<double> lo(n), di(n), up(n);
        Matrix M = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        Vector b(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = i ? u(rng) : 0.0;
            up[i] = i + 1 < n ? u(rng) : 0.0;
            di[i] = 3.0 + u(rng);
            b[static_cast<Eigen::Index>(i)] = u(rng);
            const auto k = static_cast<Eigen::Index>(i);
            M(k, k) = di[i];
            if (i) M(k, k - 1) = lo[i];
            if (i + 1 < n) M(k, k + 1) = up[i];
        }
        const Vector x = thomas_solve(lo, di, up, b);
        CHECK((x - M.partialPivLu().solve(b)).norm() <= 1e-12 * (1 + x.norm()));
    }
    std::vector<double> z{0.0};
    CHECK_THROWS_AS(thomas_solve(z, z, z, Vector::Ones(1)), std::domain_error);
}

TEST_CASE("shifted solves meet the residual bound for every structure")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto name : problems::names()) {
        const auto p = *problems::by_name(name);
        ShiftedSolver solver(p.A, p.structure);
        for (double h : {0.25, 0.025, 0.0025, 1e-4}) {
            Vector b(p.d);
            for (int i = 0; i < p.d; ++i) b[i] = g(rng);
            const Vector x = solver.solve(h, b);
            CAPTURE(name);
            CAPTURE(h);
            CHECK(relative_residual(p.A, h, x, b) <= 1e-10);
        }
    }
}

TEST_CASE("dense factorizations are cached per step size")
{
    const auto p = problems::fhn({.epsilon = 0.1});
    ShiftedSolver solver(p.A, p.structure);
    const Vector b = Vector::Ones(2);
    solver.solve(0.025, b);
    solver.solve(0.025, b);
    CHECK(solver.cached_factorizations() == 1);
    solver.solve(0.0125, b);
    CHECK(solver.cached_factorizations() == 2);
}

TEST_CASE("singular shifted systems are reported with the step size")
{
    // I - hA singular at h = 1/a.
    ShiftedSolver scalar(Matrix::Constant(1, 1, 4.0), Structure::scalar);
    CHECK_THROWS_AS(scalar.solve(0.25, Vector::Ones(1)), SingularSystemError);

    Matrix A(2, 2);
    A << 2.0, 0.0, 0.0, 3.0;
    Matrix D(2, 2);
    D << 2.0, 1.0, 0.0, 3.0;
    ShiftedSolver dense(D, Structure::dense);
    try {
        dense.solve(0.5, Vector::Ones(2));
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        CHECK(e.step() == 0.5);
        CHECK(std::string(e.what()).find("h=0.5") != std::string::npos);
    }
    CHECK_THROWS_AS(ShiftedSolver(D, Structure::diagonal), std::invalid_argument);
}
