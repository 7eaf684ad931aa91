#pragma once

#include "adaptsde/core.hpp"
#include "adaptsde/linear_solver.hpp"
#include "adaptsde/wiener.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace adaptsde {

enum class SchemeId {
    adaptive_semi_implicit,
    adaptive_explicit,
    drift_implicit,
    balanced,
    increment_tamed,
    fully_tamed,
    truncated,
    explicit_euler,
};

std::string_view scheme_name(SchemeId id);
std::optional<SchemeId> parse_scheme(std::string_view name);
std::span<const SchemeId> all_schemes();

/// True for schemes that pick their own steps from a MeshConfig.
bool is_adaptive(SchemeId id);

enum class NewtonFallback { balanced_backstop, fail };
enum class NewtonStart { previous_state, explicit_euler };

struct NewtonConfig {
    double tol = 1e-10;
    int max_iter = 50;
    NewtonFallback fallback = NewtonFallback::balanced_backstop;
    NewtonStart start = NewtonStart::previous_state;
};

class NewtonFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Single-step maps. Each takes the current state y, step h and the Wiener
// increment dW over that step.

/// (I - hA)^{-1} (y + h f(y) + g(y) dW).
Vector step_semi_implicit(const SdeProblem& p, ShiftedSolver& solver, const Vector& y, double h,
                          const Vector& dW);
Vector step_semi_implicit(const SdeProblem& p, const Vector& y, double h, const Vector& dW);

/// Balanced method; also the backstop of the adaptive schemes.
Vector step_balanced(const SdeProblem& p, const Vector& y, double h, const Vector& dW);

/// Increment-tamed Euler with the extension domain taken as all of R^d.
Vector step_increment_tamed(const SdeProblem& p, const Vector& y, double h, const Vector& dW);

/// Fully tamed Euler, taming exponent beta in (0, 1].
Vector step_fully_tamed(const SdeProblem& p, const Vector& y, double h, const Vector& dW,
                        double beta = 0.5);

/// Truncated Euler: explicit Euler evaluated at y clamped to the ball of
/// radius mu_inv(H(h)). Throws std::domain_error if H is undefined at h.
Vector step_truncated(const SdeProblem& p, const Vector& y, double h, const Vector& dW,
                      const std::function<double(double)>& mu_inv,
                      const std::function<double(double)>& H);

Vector step_explicit_euler(const SdeProblem& p, const Vector& y, double h, const Vector& dW);

struct DriftImplicitStep {
    Vector y;
    bool used_fallback = false;
    int iterations = 0;
};

/// Drift-implicit Euler. Newton on x - h(Ax + f(x)) - y - g(y)dW = 0; on
/// failure falls back to the balanced step (or throws NewtonFailure when the
/// fallback is `fail`).
DriftImplicitStep step_drift_implicit(const SdeProblem& p, const Vector& y, double h,
                                      const Vector& dW, const NewtonConfig& newton = {});

/// Uniform grid 0, h, 2h, ..., t_end with the last step truncated to land on t_end.
std::vector<double> uniform_grid(double t_end, double h);

struct AdaptivePlan {
    MeshConfig config;
};
struct GridPlan {
    std::vector<double> times;
};
using StepPlan = std::variant<AdaptivePlan, GridPlan>;

struct SolveOptions {
    NewtonConfig newton;
    double beta = 0.5;
    bool record_trajectory = false;
    double divergence_threshold = 1e12;
};

/// Integrates `p` on [0, t_end] with the given scheme.
///
/// Adaptive plans query `path` as they go; grid plans read all increments
/// from `path` first and time only the stepping loop. Adaptive schemes on a
/// grid plan apply their main step on that grid with no controller.
/// Non-finite states or norms above the divergence threshold stop the run
/// with `diverged` set.
SolveResult solve(const SdeProblem& p, SchemeId scheme, WienerPath& path, const StepPlan& plan,
                  const SolveOptions& options = {});

/// Fixed-grid solve with caller-supplied increments (one column per step).
SolveResult solve_on_grid(const SdeProblem& p, SchemeId scheme, const std::vector<double>& times,
                          const Matrix& increments, const SolveOptions& options = {});

}  // namespace adaptsde
