#include "adaptsde/harness.hpp"
#include "adaptsde/problems.hpp"
#include "adaptsde/schemes.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace adaptsde;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

/// dX = [A X + f(X)] dt + g(X) dW with constant-in-x pieces for hand checks.
SdeProblem toy(int d, int m, Matrix A, std::function<Vector(const Vector&)> f,
               std::function<Matrix(const Vector&)> g)
{
    SdeProblem p;
    p.name = "toy";
    p.d = d;
    p.m = m;
    p.A = std::move(A);
    p.f = std::move(f);
    p.g = std::move(g);
    p.df = [d](const Vector&) { return Matrix::Zero(d, d); };
    p.x0 = Vector::Zero(d);
    p.structure = d == 1 ? Structure::scalar : Structure::dense;
    return p;
}

SdeProblem zero_problem(int d = 1, int m = 1)
{
    return toy(d, m, Matrix::Zero(d, d), [d](const Vector&) { return Vector::Zero(d); },
               [d, m](const Vector&) { return Matrix::Zero(d, m); });
}

SdeProblem constant_drift(double D, double G)
{
    return toy(1, 1, Matrix::Zero(1, 1), [D](const Vector&) { return Vector::Constant(1, D); },
               [G](const Vector&) { return Matrix::Constant(1, 1, G); });
}

}  // namespace

TEST_CASE("semi-implicit step")
{
    const auto z = zero_problem(2, 2);
    CHECK(step_semi_implicit(z, vec({1.5, -2.0}), 0.3, vec({0.4, 0.1})) == vec({1.5, -2.0}));

    // (1 + 3*0.1) / (1 + 0.25*8)
    const auto gbm = problems::gbm();
    CHECK(step_semi_implicit(gbm, vec({1.0}), 0.25, vec({0.1}))[0] == doctest::Approx(1.3 / 3.0));

    Matrix A = Matrix::Zero(2, 2);
    A.diagonal() << -1.0, -2.0;
    auto diag = toy(2, 1, A, [](const Vector&) { return Vector::Zero(2); },
                    [](const Vector&) { return Matrix::Zero(2, 1); });
    diag.structure = Structure::diagonal;
    const Vector y = step_semi_implicit(diag, vec({1.0, 1.0}), 0.5, vec({0.0}));
    CHECK(y[0] == doctest::Approx(2.0 / 3.0));
    CHECK(y[1] == doctest::Approx(0.5));
}

TEST_CASE("semi-implicit residual on the SPDE system")
{
    const auto p = problems::spde_fd();
    ShiftedSolver solver(p.A, p.structure);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double h : {0.25, 0.005, 0.0005}) {
        Vector dW(p.m);
        for (int i = 0; i < p.m; ++i) dW[i] = std::sqrt(h) * n01(rng);
        const Vector next = step_semi_implicit(p, solver, p.x0, h, dW);
        const Vector rhs = p.x0 + h * p.f(p.x0) + p.g(p.x0) * dW;
        const Matrix M = Matrix::Identity(p.d, p.d) - h * p.A;
        CHECK((M * next - rhs).norm() <= 1e-10 * (1.0 + next.norm()));
    }
}

TEST_CASE("balanced step")
{
    CHECK(step_balanced(zero_problem(), vec({2.0}), 0.5, vec({0.3}))[0] == 2.0);
    CHECK(step_balanced(constant_drift(1.0, 0.0), vec({0.0}), 1.0, vec({0.7}))[0] == doctest::Approx(0.5));
    CHECK(step_balanced(constant_drift(0.0, 3.0), vec({0.0}), 0.1, vec({1.0}))[0] == doctest::Approx(0.75));
}

TEST_CASE("balanced step displacement never exceeds the Euler increment")
{
    const auto p = problems::stoch_vol_32();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Vector y = 5.0 * vec({n01(rng), n01(rng)});
        const double h = std::pow(10.0, -4.0 * std::uniform_real_distribution<double>(0, 1)(rng));
        const Vector dW = std::sqrt(h) * vec({n01(rng), n01(rng)});
        const Vector euler_incr = h * p.drift(y) + p.g(y) * dW;
        CHECK((step_balanced(p, y, h, dW) - y).norm() <= euler_incr.norm() * (1 + 1e-14));
    }
}

TEST_CASE("increment tamed step")
{
    CHECK(step_increment_tamed(zero_problem(), vec({1.0}), 0.5, vec({0.2}))[0] == 1.0);
    // h||v|| <= 1 leaves the Euler increment untouched.
    const auto small = constant_drift(0.5, 0.2);
    CHECK(step_increment_tamed(small, vec({1.0}), 0.5, vec({0.1}))[0]
          == step_explicit_euler(small, vec({1.0}), 0.5, vec({0.1}))[0]);
    CHECK(step_increment_tamed(constant_drift(10.0, 0.0), vec({2.0}), 1.0, vec({0.0}))[0]
          == doctest::Approx(3.0));
}

TEST_CASE("fully tamed step")
{
    CHECK(step_fully_tamed(zero_problem(), vec({1.0}), 0.5, vec({0.2}))[0] == 1.0);
    CHECK(step_fully_tamed(constant_drift(1.0, 0.0), vec({0.0}), 0.25, vec({0.0}), 0.5)[0]
          == doctest::Approx(1.0 / 6.0));
    CHECK_THROWS_AS(step_fully_tamed(zero_problem(), vec({1.0}), 0.5, vec({0.2}), 0.0),
                    std::invalid_argument);
    CHECK(SolveOptions{}.beta == 0.5);
}

TEST_CASE("truncated step")
{
    // Identity drift exposes the truncated state: step = y + h z when g = 0, dW = 0.
    auto probe = toy(2, 1, Matrix::Zero(2, 2), [](const Vector& x) { return x; },
                     [](const Vector&) { return Matrix::Zero(2, 1); });
    auto radius_one = [](double) { return 1.0; };
    auto H = [](double) { return 1.0; };

    const Vector at_origin = step_truncated(probe, Vector::Zero(2), 0.1, vec({0.0}), radius_one, H);
    CHECK(at_origin == Vector::Zero(2));

    const Vector inside = vec({0.3, 0.4});
    CHECK(step_truncated(probe, inside, 0.1, vec({0.0}), radius_one, H)
          == step_explicit_euler(probe, inside, 0.1, vec({0.0})));

    const Vector outside = vec({3.0, 4.0});
    const Vector z = (step_truncated(probe, outside, 0.1, vec({0.0}), radius_one, H) - outside) / 0.1;
    CHECK(z.norm() == doctest::Approx(1.0));
    CHECK(z[0] == doctest::Approx(0.6));

    // Ginzburg-Landau: the clamp radius is mu^{-1}(H(h)).
    const auto gl = problems::ginzburg_landau();
    const auto tf = problems::gl_truncation_functions();
    const double h = 0.25;
    const double radius = tf.mu_inv(tf.H(h));
    const double y = 2.0;
    REQUIRE(y > radius);
    const double expected = y + h * (0.1 * radius - 0.1 * radius * radius * radius);
    CHECK(step_truncated(gl, vec({y}), h, vec({0.0}), tf.mu_inv, tf.H)[0] == doctest::Approx(expected));

    auto undefined = [](double) { return std::nan(""); };
    CHECK_THROWS_AS(step_truncated(gl, vec({y}), h, vec({0.0}), tf.mu_inv, undefined), std::domain_error);
}

TEST_CASE("drift implicit step")
{
    auto additive = toy(1, 1, Matrix::Zero(1, 1), [](const Vector&) { return Vector::Zero(1); },
                        [](const Vector&) { return Matrix::Constant(1, 1, 2.0); });
    auto r = step_drift_implicit(additive, vec({1.0}), 0.1, vec({0.3}));
    CHECK_FALSE(r.used_fallback);
    CHECK(r.iterations == 1);
    CHECK(r.y[0] == doctest::Approx(1.6));

    const auto gl = problems::ginzburg_landau();
    const double h = 0.0025;
    auto s = step_drift_implicit(gl, vec({2.0}), h, vec({0.0}));
    CHECK_FALSE(s.used_fallback);
    const double x = s.y[0];
    const double residual = x - h * 0.1 * x * (1.0 - x * x) - 2.0;
    CHECK(std::abs(residual) <= 1e-10);

    // I - h(A + Df) vanishes: Newton cannot proceed.
    auto singular = toy(1, 1, Matrix::Zero(1, 1), [](const Vector& v) { return Vector(10.0 * v); },
                        [](const Vector&) { return Matrix::Constant(1, 1, 0.5); });
    singular.df = [](const Vector&) { return Matrix::Constant(1, 1, 10.0); };
    auto fb = step_drift_implicit(singular, vec({1.0}), 0.1, vec({0.2}));
    CHECK(fb.used_fallback);
    CHECK(fb.y == step_balanced(singular, vec({1.0}), 0.1, vec({0.2})));
    NewtonConfig strict;
    strict.fallback = NewtonFallback::fail;
    CHECK_THROWS_AS(step_drift_implicit(singular, vec({1.0}), 0.1, vec({0.2}), strict), NewtonFailure);

    NewtonConfig predictor;
    predictor.start = NewtonStart::explicit_euler;
    CHECK(step_drift_implicit(gl, vec({2.0}), h, vec({0.0}), predictor).y[0] == doctest::Approx(x));

    auto no_jac = gl;
    no_jac.df = nullptr;
    CHECK_THROWS_AS(step_drift_implicit(no_jac, vec({2.0}), h, vec({0.0})), std::invalid_argument);
}

TEST_CASE("explicit Euler step")
{
    CHECK(step_explicit_euler(zero_problem(), vec({4.0}), 0.5, vec({1.0}))[0] == 4.0);
    const auto gbm = problems::gbm({.sigma = 0.0});
    CHECK(step_explicit_euler(gbm, vec({1.0}), 0.25, vec({0.3}))[0] == doctest::Approx(-1.0));
}

TEST_CASE("scheme names round-trip")
{
    for (auto id : all_schemes()) CHECK(parse_scheme(scheme_name(id)) == id);
    CHECK_FALSE(parse_scheme("milstein"));
}

TEST_CASE("adaptive solve with zero drift takes exactly k steps")
{
    auto p = zero_problem();
    p.x0 = vec({1.0});
    p.t_end = 0.25 * 7;
    const MeshConfig c(0.25, 100);
    WienerPath path(1, 1);
    auto r = solve(p, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{c});
    CHECK(r.n_steps == 7);
    CHECK(r.n_backstop == 0);
    CHECK(r.mean_h == doctest::Approx(0.25));
    CHECK(mesh_invariants_hold(r, c, p.t_end));
}

TEST_CASE("backstop steps are exactly h_min and partition the mesh")
{
    auto p = problems::ginzburg_landau({.x0 = 100.0});
    const MeshConfig c(0.25, 100);
    WienerPath path(1, 17);
    auto r = solve(p, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{c});
    REQUIRE_FALSE(r.diverged);
    CHECK(r.n_backstop > 0);
    std::size_t count = 0;
    for (std::size_t n = 0; n < r.mesh.size(); ++n) {
        const auto& s = r.mesh[n];
        if (s.origin == StepOrigin::backstop) {
            ++count;
            if (n + 1 < r.mesh.size()) CHECK(s.h == doctest::Approx(c.h_min()).epsilon(1e-12));
            CHECK(s.attempted_h <= c.h_min());
        } else {
            CHECK(s.attempted_h > c.h_min());
        }
    }
    CHECK(count == r.n_backstop);
    CHECK(mesh_invariants_hold(r, c, p.t_end));
}

TEST_CASE("last step lands exactly on t_end")
{
    for (auto name : problems::names()) {
        const auto p = *problems::by_name(name);
        if (p.name == "spde") continue;
        for (double hm : {0.3, 0.07}) {
            const MeshConfig c(hm, 100);
            WienerPath path(p.m, 99);
            auto r = solve(p, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{c});
            CAPTURE(name);
            CHECK(mesh_invariants_hold(r, c, p.t_end));
            CHECK(mesh_times(r.mesh, p.t_end).back() == p.t_end);
            CHECK((r.noise_sum - path.value_at(p.t_end)).norm() < 1e-12);
        }
    }
}

TEST_CASE("adaptive explicit folds A into the controller drift")
{
    const auto gbm = problems::gbm();
    const MeshConfig c(0.25, 100);
    WienerPath path(1, 4);
    auto r = solve(gbm, SchemeId::adaptive_explicit, path, AdaptivePlan{c});
    // ||A y|| = 8 |y| > 1 forces h = h_max * max(1/(8|y|), 1/8) < h_max.
    CHECK(r.mesh.front().h == doctest::Approx(0.25 / 8.0));
}

TEST_CASE("GBM: drift implicit and semi-implicit coincide on shared meshes")
{
    const auto gbm = problems::gbm();
    const MeshConfig c(0.25, 100);
    for (std::uint64_t s = 0; s < 20; ++s) {
        WienerPath path(1, s);
        auto si = solve(gbm, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{c});
        auto di = solve(gbm, SchemeId::drift_implicit, path, GridPlan{mesh_times(si.mesh, gbm.t_end)});
        CHECK(std::abs(si.y_terminal[0] - di.y_terminal[0]) <= 1e-12);
        CHECK(di.n_backstop == 0);
    }
}

TEST_CASE("small-step agreement of all schemes on GBM")
{
    const auto gbm = problems::gbm();
    const double h = 1e-4;
    const auto grid = uniform_grid(gbm.t_end, h);
    // Balanced and fully tamed (beta = 1/2) rescale each increment by 1 + O(h^{1/2}).
    auto tolerance = [h](SchemeId id) {
        return id == SchemeId::balanced || id == SchemeId::fully_tamed ? 10 * std::sqrt(h) : 10 * h;
    };
    const std::vector<SchemeId> ids{SchemeId::adaptive_semi_implicit, SchemeId::drift_implicit,
                                    SchemeId::balanced, SchemeId::increment_tamed,
                                    SchemeId::fully_tamed, SchemeId::explicit_euler};
    for (std::uint64_t seed : {1u, 2u, 77u}) {
        WienerPath path(1, seed);
        const Matrix dW = path.increments(grid);
        std::vector<Vector> ends;
        for (auto id : ids) {
            auto r = solve_on_grid(gbm, id, grid, dW);
            REQUIRE_FALSE(r.diverged);
            ends.push_back(r.y_terminal);
        }
        for (std::size_t i = 0; i < ends.size(); ++i)
            for (std::size_t j = i + 1; j < ends.size(); ++j) {
                CAPTURE(scheme_name(ids[i]));
                CAPTURE(scheme_name(ids[j]));
                CHECK((ends[i] - ends[j]).norm() <= std::max(tolerance(ids[i]), tolerance(ids[j])));
            }
    }
}

TEST_CASE("divergence is flagged, not thrown")
{
    auto cubic = toy(1, 1, Matrix::Zero(1, 1), [](const Vector& x) { return Vector(x.array().cube()); },
                     [](const Vector&) { return Matrix::Zero(1, 1); });
    cubic.x0 = vec({100.0});
    WienerPath path(1, 1);
    auto r = solve(cubic, SchemeId::explicit_euler, path, GridPlan{uniform_grid(1.0, 0.5)});
    CHECK(r.diverged);
}

TEST_CASE("solve argument checks")
{
    const auto gbm = problems::gbm();
    WienerPath path(1, 1);
    CHECK_THROWS_AS(solve(gbm, SchemeId::balanced, path, AdaptivePlan{MeshConfig(0.1, 10)}),
                    std::invalid_argument);
    WienerPath wrong(2, 1);
    CHECK_THROWS_AS(solve(gbm, SchemeId::adaptive_semi_implicit, wrong, AdaptivePlan{MeshConfig(0.1, 10)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve(gbm, SchemeId::truncated, path, GridPlan{uniform_grid(1.0, 0.1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve(gbm, SchemeId::balanced, path, GridPlan{{0.0, 0.5}}), std::invalid_argument);
}

TEST_CASE("uniform grid truncates the final step")
{
    auto g = uniform_grid(1.0, 0.3);
    REQUIRE(g.size() == 5);
    CHECK(g.back() == 1.0);
    CHECK(g[3] == doctest::Approx(0.9));
    CHECK(uniform_grid(1.0, 0.25).size() == 5);
    CHECK(uniform_grid(1.0, 0.1).size() == 11);
}

TEST_CASE("trajectory recording")
{
    const auto gl = problems::ginzburg_landau();
    WienerPath path(1, 3);
    SolveOptions opt;
    opt.record_trajectory = true;
    auto r = solve(gl, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{MeshConfig(0.1, 10)}, opt);
    REQUIRE(r.trajectory);
    CHECK(r.trajectory->size() == r.n_steps + 1);
    CHECK(r.trajectory->front().y == gl.x0);
    CHECK(r.trajectory->back().t == doctest::Approx(1.0));
    CHECK(r.trajectory->back().y == r.y_terminal);
}
