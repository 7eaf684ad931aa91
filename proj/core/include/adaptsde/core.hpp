#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adaptsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Shape of the linear drift operator, used to pick a linear solver.
enum class Structure { dense, tridiagonal, diagonal, scalar };

std::string to_string(Structure s);

/// Autonomous semi-linear SDE  dX = [A X + f(X)] dt + g(X) dW  on [0, t_end].
///
/// g(x) is d x m; column i multiplies the i-th Wiener component. df is the
/// Jacobian of f and is only needed by the drift-implicit scheme.
struct SdeProblem {
    std::string name;
    int d = 1;
    int m = 1;
    Matrix A;
    std::function<Vector(const Vector&)> f;
    std::function<Matrix(const Vector&)> g;
    std::function<Matrix(const Vector&)> df;
    Vector x0;
    double t_end = 1.0;
    Structure structure = Structure::dense;

    /// Truncation data for the truncated Euler scheme (mu^{-1} and H).
    /// Empty for problems where the scheme is not applicable.
    std::function<double(double)> mu_inv;
    std::function<double(double)> truncation_level;

    bool has_jacobian() const { return static_cast<bool>(df); }
    bool supports_truncation() const { return mu_inv && truncation_level; }

    /// Full drift A x + f(x).
    Vector drift(const Vector& x) const { return A * x + f(x); }
};

/// True when every nonzero of A is allowed by the structure hint.
bool structure_consistent(const Matrix& A, Structure hint);

/// Throws std::invalid_argument when dimensions of A, x0 or g(x0) disagree
/// with (d, m) or the structure hint does not match A.
void check_problem(const SdeProblem& problem);

/// Step-size bounds h_min = h_max / rho. Immutable; h_min is always derived.
class MeshConfig {
public:
    MeshConfig(double h_max, double rho);

    double h_max() const { return h_max_; }
    double rho() const { return rho_; }
    double h_min() const { return h_max_ / rho_; }

private:
    double h_max_;
    double rho_;
};

enum class StepOrigin { main_scheme, backstop };

struct StepRecord {
    double t_start = 0.0;
    double h = 0.0;
    StepOrigin origin = StepOrigin::main_scheme;
    /// Controller proposal before clamping; equals h for fixed grids.
    double attempted_h = 0.0;
};

struct TrajectoryPoint {
    double t;
    Vector y;
};

struct SolveResult {
    Vector y_terminal;
    std::vector<StepRecord> mesh;
    std::optional<std::vector<TrajectoryPoint>> trajectory;
    std::size_t n_steps = 0;
    std::size_t n_backstop = 0;
    double mean_h = 0.0;
    /// Seconds spent stepping; Wiener path sampling is excluded.
    double wall_time = 0.0;
    bool diverged = false;
    /// Sum of all Wiener increments consumed. Equals W(t_end) whenever the
    /// run reached t_end, so it identifies the driving path across schemes.
    Vector noise_sum;
};

/// Grid points 0 = t_0 < ... < t_N = t_end of a realized mesh.
std::vector<double> mesh_times(const std::vector<StepRecord>& mesh, double t_end);

enum class BoundVerdict { holds, violated, indeterminate };

struct HmaxBoundReport {
    BoundVerdict verdict = BoundVerdict::indeterminate;
    double lhs = 0.0;
    double sqrt_norm_sq = 0.0;  ///< ||A^{1/2}||^2
    double norm_sq = 0.0;       ///< ||A||^2
    std::string diagnostic;
};

/// Evaluates h_max (||A^{1/2}||^2 + (1 + h_max/2) ||A||^2) <= 1 - delta.
/// Advisory only: the experiments run with parameter sets that violate it.
HmaxBoundReport validate_hmax_bound(const SdeProblem& problem, const MeshConfig& config,
                                    double delta = 0.0);

/// Squared l2 distance ||y - x_ref||^2.
double terminal_error(const Vector& y, const Vector& x_ref);

}  // namespace adaptsde
