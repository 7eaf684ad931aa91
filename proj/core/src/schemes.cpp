#include "adaptsde/schemes.hpp"

#include "adaptsde/control.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adaptsde {

namespace {

constexpr std::array<SchemeId, 8> kSchemes{
    SchemeId::adaptive_semi_implicit, SchemeId::adaptive_explicit, SchemeId::drift_implicit,
    SchemeId::balanced,               SchemeId::increment_tamed,   SchemeId::fully_tamed,
    SchemeId::truncated,              SchemeId::explicit_euler,
};

Vector semi_implicit_from(const SdeProblem& p, ShiftedSolver& solver, const Vector& y,
                          const Vector& f_y, double h, const Vector& dW)
{
    Vector rhs = y + h * f_y + p.g(y) * dW;
    return solver.solve(h, rhs);
}

Vector explicit_from(const SdeProblem& p, const Vector& y, const Vector& drift, double h,
                     const Vector& dW)
{
    return y + h * drift + p.g(y) * dW;
}

Vector balanced_from(const SdeProblem& p, const Vector& y, const Vector& drift, double h,
                     const Vector& dW)
{
    const Matrix gy = p.g(y);
    double noise_norm = 0.0;
    for (Eigen::Index r = 0; r < gy.cols(); ++r) noise_norm += gy.col(r).norm() * std::abs(dW[r]);
    const double denom = 1.0 + h * drift.norm() + noise_norm;
    return y + (h * drift + gy * dW) / denom;
}

}  // namespace

std::string_view scheme_name(SchemeId id)
{
    switch (id) {
    case SchemeId::adaptive_semi_implicit: return "adaptive-si";
    case SchemeId::adaptive_explicit: return "adaptive-explicit";
    case SchemeId::drift_implicit: return "drift-implicit";
    case SchemeId::balanced: return "balanced";
    case SchemeId::increment_tamed: return "increment-tamed";
    case SchemeId::fully_tamed: return "fully-tamed";
    case SchemeId::truncated: return "truncated";
    case SchemeId::explicit_euler: return "explicit-euler";
    }
    return "unknown";
}

std::optional<SchemeId> parse_scheme(std::string_view name)
{
    for (auto id : kSchemes)
        if (scheme_name(id) == name) return id;
    return std::nullopt;
}

std::span<const SchemeId> all_schemes() { return kSchemes; }

bool is_adaptive(SchemeId id)
{
    return id == SchemeId::adaptive_semi_implicit || id == SchemeId::adaptive_explicit;
}

Vector step_semi_implicit(const SdeProblem& p, ShiftedSolver& solver, const Vector& y, double h,
                          const Vector& dW)
{
    return semi_implicit_from(p, solver, y, p.f(y), h, dW);
}

Vector step_semi_implicit(const SdeProblem& p, const Vector& y, double h, const Vector& dW)
{
    ShiftedSolver solver(p.A, p.structure);
    return step_semi_implicit(p, solver, y, h, dW);
}

Vector step_balanced(const SdeProblem& p, const Vector& y, double h, const Vector& dW)
{
    return balanced_from(p, y, p.drift(y), h, dW);
}

Vector step_increment_tamed(const SdeProblem& p, const Vector& y, double h, const Vector& dW)
{
    const Vector v = h * p.drift(y) + p.g(y) * dW;
    return y + v / std::max(1.0, h * v.norm());
}

Vector step_fully_tamed(const SdeProblem& p, const Vector& y, double h, const Vector& dW,
                        double beta)
{
    if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("fully tamed: beta must lie in (0, 1]");
    const Vector drift = p.drift(y);
    const Matrix gy = p.g(y);
    const double hb = std::pow(h, beta);
    double g_norms = 0.0;
    for (Eigen::Index j = 0; j < gy.cols(); ++j) g_norms += gy.col(j).norm();
    const double denom = 1.0 + hb * drift.norm() + g_norms * hb;
    return y + (h * drift + gy * dW) / denom;
}

Vector step_truncated(const SdeProblem& p, const Vector& y, double h, const Vector& dW,
                      const std::function<double(double)>& mu_inv,
                      const std::function<double(double)>& H)
{
    const double level = H(h);
    if (!std::isfinite(level) || level <= 0.0)
        throw std::domain_error("truncated: H is undefined at the requested step");
    const double radius = mu_inv(level);
    const double norm = y.norm();
    // x/||x|| := 0 at the origin.
    const Vector z = norm == 0.0 ? Vector::Zero(y.size()) : Vector(std::min(norm, radius) * (y / norm));
    return y + h * p.drift(z) + p.g(z) * dW;
}

Vector step_explicit_euler(const SdeProblem& p, const Vector& y, double h, const Vector& dW)
{
    return explicit_from(p, y, p.drift(y), h, dW);
}

DriftImplicitStep step_drift_implicit(const SdeProblem& p, const Vector& y, double h,
                                      const Vector& dW, const NewtonConfig& newton)
{
    if (!p.has_jacobian()) throw std::invalid_argument("drift-implicit: problem has no drift Jacobian");
    if (!(newton.tol > 0.0) || newton.max_iter < 1)
        throw std::invalid_argument("drift-implicit: invalid Newton configuration");

    const Vector b = y + p.g(y) * dW;
    const auto d = y.size();
    const double scale = std::max(b.norm(), std::numeric_limits<double>::min());
    Vector x = newton.start == NewtonStart::explicit_euler ? Vector(b + h * p.drift(y)) : y;

    for (int it = 0; it <= newton.max_iter; ++it) {
        const Vector F = x - h * p.drift(x) - b;
        if (!F.allFinite()) break;
        if (it > 0 && F.norm() <= newton.tol * scale) return {std::move(x), false, it};
        if (it == newton.max_iter) break;
        const Matrix J = Matrix::Identity(d, d) - h * (p.A + p.df(x));
        Eigen::PartialPivLU<Matrix> lu(J);
        if (!(lu.rcond() >= ShiftedSolver::min_rcond)) break;
        x -= lu.solve(F);
    }

    if (newton.fallback == NewtonFallback::fail)
        throw NewtonFailure("drift-implicit: Newton iteration did not converge");
    return {step_balanced(p, y, h, dW), true, newton.max_iter};
}

std::vector<double> uniform_grid(double t_end, double h)
{
    if (!(h > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("uniform_grid: h and t_end must be positive");
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / h * (1.0 - 1e-12))));
    std::vector<double> times(n + 1);
    for (std::size_t k = 0; k < n; ++k) times[k] = static_cast<double>(k) * h;
    times[n] = t_end;
    return times;
}

namespace {

struct Marcher {
    const SdeProblem& p;
    const SolveOptions& opt;
    SolveResult result;
    Vector y;
    double t_reached = 0.0;

    Marcher(const SdeProblem& problem, const SolveOptions& options)
        : p(problem), opt(options), y(problem.x0)
    {
        result.noise_sum = Vector::Zero(problem.m);
        if (opt.record_trajectory) result.trajectory.emplace().push_back({0.0, y});
    }

    // Returns false once the state has diverged.
    bool accept(double t_start, double t_next, double attempted, StepOrigin origin, Vector next,
                const Vector& dW)
    {
        const double h = t_next - t_start;
        y = std::move(next);
        t_reached = t_next;
        result.mesh.push_back({t_start, h, origin, attempted});
        if (origin == StepOrigin::backstop) ++result.n_backstop;
        result.noise_sum += dW;
        if (result.trajectory) result.trajectory->push_back({t_next, y});
        if (!y.allFinite() || y.norm() > opt.divergence_threshold) {
            result.diverged = true;
            return false;
        }
        return true;
    }

    SolveResult finish(double elapsed)
    {
        result.y_terminal = y;
        result.n_steps = result.mesh.size();
        result.mean_h = result.n_steps ? t_reached / static_cast<double>(result.n_steps) : 0.0;
        result.wall_time = elapsed;
        return std::move(result);
    }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SolveResult solve_adaptive(const SdeProblem& p, SchemeId scheme, WienerPath& path,
                           const MeshConfig& config, const SolveOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    const bool semi = scheme == SchemeId::adaptive_semi_implicit;
    std::optional<ShiftedSolver> solver;
    if (semi) solver.emplace(p.A, p.structure);

    Marcher march(p, opt);
    const double T = p.t_end;
    double t = 0.0;
    double path_time = 0.0;  // excluded from the reported cost
    while (t < T) {
        // The explicit variant folds A into the drift seen by the controller.
        const Vector f_y = semi ? p.f(march.y) : p.drift(march.y);
        const StepDecision decision = propose_step(march.y, f_y, config);
        double h = decision.h;
        double t_next = t + h;
        if (t_next >= T || T - t_next <= 1e-12 * T) t_next = T;
        // Exact difference, so the recorded steps telescope to t_end.
        h = t_next - t;
        const auto draw_start = std::chrono::steady_clock::now();
        const Vector dW = path.increment(t, t_next);
        path_time += seconds_since(draw_start);
        Vector next = decision.use_backstop ? balanced_from(p, march.y, p.drift(march.y), h, dW)
                      : semi ? semi_implicit_from(p, *solver, march.y, f_y, h, dW)
                             : explicit_from(p, march.y, f_y, h, dW);
        const auto origin = decision.use_backstop ? StepOrigin::backstop : StepOrigin::main_scheme;
        if (!march.accept(t, t_next, decision.raw_proposal, origin, std::move(next), dW)) break;
        t = t_next;
    }
    return march.finish(std::max(0.0, seconds_since(start) - path_time));
}

}  // namespace

SolveResult solve_on_grid(const SdeProblem& p, SchemeId scheme, const std::vector<double>& times,
                          const Matrix& increments, const SolveOptions& opt)
{
    if (times.size() < 2) throw std::invalid_argument("solve_on_grid: need at least one step");
    if (increments.cols() + 1 != static_cast<Eigen::Index>(times.size()) || increments.rows() != p.m)
        throw std::invalid_argument("solve_on_grid: increments do not match grid");
    if (scheme == SchemeId::drift_implicit && !p.has_jacobian())
        throw std::invalid_argument("drift-implicit requires a drift Jacobian");
    if (scheme == SchemeId::truncated && !p.supports_truncation())
        throw std::invalid_argument("truncated scheme is not available for problem " + p.name);

    const auto start = std::chrono::steady_clock::now();
    std::optional<ShiftedSolver> solver;
    if (scheme == SchemeId::adaptive_semi_implicit) solver.emplace(p.A, p.structure);

    Marcher march(p, opt);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double h = times[k + 1] - times[k];
        const Vector dW = increments.col(static_cast<Eigen::Index>(k));
        const Vector& y = march.y;
        Vector next;
        auto origin = StepOrigin::main_scheme;
        switch (scheme) {
        case SchemeId::adaptive_semi_implicit: next = step_semi_implicit(p, *solver, y, h, dW); break;
        case SchemeId::adaptive_explicit:
        case SchemeId::explicit_euler: next = step_explicit_euler(p, y, h, dW); break;
        case SchemeId::balanced: next = step_balanced(p, y, h, dW); break;
        case SchemeId::increment_tamed: next = step_increment_tamed(p, y, h, dW); break;
        case SchemeId::fully_tamed: next = step_fully_tamed(p, y, h, dW, opt.beta); break;
        case SchemeId::truncated:
            next = step_truncated(p, y, h, dW, p.mu_inv, p.truncation_level);
            break;
        case SchemeId::drift_implicit: {
            auto r = step_drift_implicit(p, y, h, dW, opt.newton);
            if (r.used_fallback) origin = StepOrigin::backstop;
            next = std::move(r.y);
            break;
        }
        }
        if (!march.accept(times[k], times[k + 1], h, origin, std::move(next), dW)) break;
    }
    return march.finish(seconds_since(start));
}

SolveResult solve(const SdeProblem& p, SchemeId scheme, WienerPath& path, const StepPlan& plan,
                  const SolveOptions& options)
{
    if (path.dim() != p.m) throw std::invalid_argument("solve: path dimension differs from m");
    if (const auto* adaptive = std::get_if<AdaptivePlan>(&plan)) {
        if (!is_adaptive(scheme))
            throw std::invalid_argument(std::string(scheme_name(scheme)) + " is a fixed-step scheme");
        return solve_adaptive(p, scheme, path, adaptive->config, options);
    }
    const auto& grid = std::get<GridPlan>(plan).times;
    if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != p.t_end)
        throw std::invalid_argument("solve: grid must run from 0 to t_end");
    const Matrix dW = path.increments(grid);
    return solve_on_grid(p, scheme, grid, dW, options);
}

}  // namespace adaptsde
