#include "adaptsde/core.hpp"
#include "adaptsde/problems.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <complex>

using namespace adaptsde;

namespace {

SdeProblem scalar_problem(double a)
{
    auto p = problems::gbm({.r = a});
    return p;
}

// Independent route to ||A^{1/2}||^2: eigendecomposition with the principal
// complex square root of each eigenvalue.
double sqrt_norm_sq_by_eigen(const Matrix& A)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<std::complex<double>>());
    const Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::VectorXcd s = es.eigenvalues().unaryExpr([](std::complex<double> z) { return std::sqrt(z); });
    const Eigen::MatrixXcd R = V * s.asDiagonal() * V.inverse();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
    return svd.singularValues()(0) * svd.singularValues()(0);
}

}  // namespace

TEST_CASE("h_max bound: zero operator holds with zero lhs")
{
    auto p = scalar_problem(0.0);
    for (int d : {1, 3}) {
        p.d = d;
        p.A = Matrix::Zero(d, d);
        auto r = validate_hmax_bound(p, MeshConfig(0.25, 100), 0.0);
        CHECK(r.verdict == BoundVerdict::holds);
        CHECK(r.lhs == 0.0);
    }
}

TEST_CASE("h_max bound: GBM drift A=-8 violates the bound")
{
    auto r = validate_hmax_bound(scalar_problem(-8.0), MeshConfig(0.25, 100));
    CHECK(r.verdict == BoundVerdict::violated);
    CHECK(r.sqrt_norm_sq == doctest::Approx(8.0));
    CHECK(r.norm_sq == doctest::Approx(64.0));
    CHECK(r.lhs == doctest::Approx(0.25 * (8.0 + 1.125 * 64.0)));
    CHECK(r.lhs == doctest::Approx(20.0));
    CHECK(r.diagnostic.find("warning") != std::string::npos);
}

TEST_CASE("h_max bound: A=-0.5 holds for delta up to 0.8")
{
    const double lhs = 0.25 * (0.5 + 1.125 * 0.25);
    auto p = scalar_problem(-0.5);
    auto r = validate_hmax_bound(p, MeshConfig(0.25, 100), 0.8);
    CHECK(r.lhs == doctest::Approx(lhs));
    CHECK(r.lhs == doctest::Approx(0.1953125));
    CHECK(r.verdict == BoundVerdict::holds);
    CHECK(validate_hmax_bound(p, MeshConfig(0.25, 100), 0.81).verdict == BoundVerdict::violated);
    CHECK_THROWS_AS(validate_hmax_bound(p, MeshConfig(0.25, 100), 1.5), std::invalid_argument);
}

TEST_CASE("h_max bound: non-symmetric operator agrees with eigendecomposition route")
{
    for (double eps : {0.5, 0.1}) {
        const auto p = problems::fhn({.epsilon = eps});
        auto r = validate_hmax_bound(p, MeshConfig(0.025, 100));
        REQUIRE(r.verdict != BoundVerdict::indeterminate);
        CHECK(r.sqrt_norm_sq == doctest::Approx(sqrt_norm_sq_by_eigen(p.A)).epsilon(1e-8));
    }
}

TEST_CASE("h_max bound: square root failure is indeterminate, never thrown")
{
    // Nilpotent: no square root exists.
    auto p = scalar_problem(0.0);
    p.d = 2;
    p.A = Matrix::Zero(2, 2);
    p.A(0, 1) = 1.0;
    auto r = validate_hmax_bound(p, MeshConfig(0.1, 10));
    CHECK(r.verdict == BoundVerdict::indeterminate);
    CHECK(r.diagnostic.find("warning") != std::string::npos);
}

TEST_CASE("terminal_error is the squared l2 distance")
{
    Vector a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    CHECK(terminal_error(a, a) == 0.0);
    CHECK(terminal_error(a, b) == 2.0);
    Vector c(2);
    c << 3, 4;
    CHECK(terminal_error(c, Vector::Zero(2)) == 25.0);
    CHECK_THROWS_AS(terminal_error(c, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("MeshConfig derives h_min and enforces its domain")
{
    MeshConfig c(0.25, 100);
    CHECK(c.h_min() * c.rho() == doctest::Approx(c.h_max()));
    CHECK(c.h_min() == 0.0025);
    CHECK_THROWS_AS(MeshConfig(1.5, 100), std::invalid_argument);
    CHECK_THROWS_AS(MeshConfig(0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(MeshConfig(0.5, 0.5), std::invalid_argument);
    CHECK_NOTHROW(MeshConfig(1.0, 1.0));
}

TEST_CASE("structure hints are checked against A")
{
    Matrix T = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
        T(i, i) = -2;
        if (i) T(i, i - 1) = 1;
        if (i < 3) T(i, i + 1) = 1;
    }
    CHECK(structure_consistent(T, Structure::tridiagonal));
    CHECK(structure_consistent(T, Structure::dense));
    CHECK_FALSE(structure_consistent(T, Structure::diagonal));
    T(0, 3) = 1;
    CHECK_FALSE(structure_consistent(T, Structure::tridiagonal));
    CHECK(structure_consistent(Matrix::Identity(3, 3), Structure::diagonal));
    CHECK_FALSE(structure_consistent(Matrix::Identity(3, 3), Structure::scalar));

    for (auto name : problems::names()) {
        auto p = *problems::by_name(name);
        CAPTURE(name);
        CHECK_NOTHROW(check_problem(p));
    }
    auto bad = problems::gbm();
    bad.structure = Structure::scalar;
    bad.A = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(check_problem(bad), std::invalid_argument);
}

TEST_CASE("mesh_times closes the grid at t_end")
{
    std::vector<StepRecord> mesh{{0.0, 0.4, StepOrigin::main_scheme, 0.4},
                                 {0.4, 0.6, StepOrigin::main_scheme, 0.7}};
    auto t = mesh_times(mesh, 1.0);
    REQUIRE(t.size() == 3);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 0.4);
    CHECK(t[2] == 1.0);
}
