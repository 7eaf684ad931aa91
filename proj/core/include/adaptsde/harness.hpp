#pragma once

#include "adaptsde/core.hpp"
#include "adaptsde/schemes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptsde {

struct ExperimentConfig {
    std::string problem;
    std::vector<SchemeId> schemes;
    std::vector<double> h_max_list;
    double rho = 100.0;
    int samples = 100;
    int refine_levels = 6;
    std::uint64_t seed = 20180101;
    /// Overrides the problem horizon when set.
    std::optional<double> t_end;
    /// 0 selects ADAPTSDE_WORKERS or the hardware concurrency.
    int workers = 0;
    SolveOptions solve_options;

    /// Standard sweep defaults for a catalog problem: h_max grid, refinement
    /// depth and scheme list (truncated only where it is defined).
    static ExperimentConfig defaults_for(const std::string& problem);

    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;
};

/// Worker count from ADAPTSDE_WORKERS, else the hardware concurrency.
int default_worker_count();

/// Pooled statistics of adaptive Wiener increments, z = dW / sqrt(h).
struct IncrementMoments {
    double sum_z = 0.0;          ///< over steps and components
    double sum_sq_ratio = 0.0;   ///< sum of ||dW||^2 / h over steps
    std::size_t n_steps = 0;
    int m = 0;

    void merge(const IncrementMoments& other);
    double mean_z() const;
    double mean_sq_ratio() const;
};

struct SchemeSample {
    SchemeId scheme;
    double sq_error = 0.0;  ///< NaN when the run diverged
    double wall_time = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_backstop = 0;
    bool diverged = false;
    /// max |sum of consumed dW - W(T)|; identifies the shared path.
    double path_checksum_error = 0.0;
};

struct SampleRecord {
    std::size_t sample_index = 0;
    double h_max = 0.0;
    Vector reference;
    bool reference_ok = true;
    double mean_adaptive_h = 0.0;
    double uniform_h = 0.0;
    std::size_t adaptive_steps = 0;
    /// h_min <= h <= h_max (except the last step), sum h = T, N in range.
    bool mesh_ok = true;
    IncrementMoments moments;
    std::vector<SchemeSample> schemes;
};

/// One Monte-Carlo sample of the coupled protocol: adaptive run, bridge
/// refined balanced reference, then fixed-step schemes on the uniform grid
/// whose step is the sample's mean adaptive step. All runs share one path.
SampleRecord run_sample(const SdeProblem& problem, const ExperimentConfig& config,
                        std::size_t sample_index, double h_max);

struct RmseResult {
    double value = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
    bool ok = false;  ///< false: no finite samples
};

/// sqrt(mean) over finite squared errors; NaN entries are counted as excluded.
RmseResult rmse(std::span<const double> squared_errors);

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
    bool ok = false;  ///< false: fewer than two usable points
};

/// Least-squares fit of log(rmse) against log(h_max).
OrderFit fit_order(std::span<const double> h_max, std::span<const double> rmse_values);

struct ConvergenceRow {
    std::string problem;
    SchemeId scheme;
    double h_max = 0.0;
    double rho = 0.0;
    int samples = 0;
    double rmse = 0.0;
    double mean_cputime_s = 0.0;
    double mean_adaptive_h = 0.0;
    std::size_t n_backstop = 0;
    std::size_t n_diverged = 0;
};

struct ConvergenceTable {
    std::string problem;
    std::vector<ConvergenceRow> rows;
    std::map<SchemeId, OrderFit> order;
    IncrementMoments moments;
    std::size_t mesh_violations = 0;
    std::size_t invalid_references = 0;
    double max_path_checksum_error = 0.0;
};

ConvergenceTable run_experiment(const SdeProblem& problem, const ExperimentConfig& config);
ConvergenceTable run_experiment(const ExperimentConfig& config);

/// Order fits per scheme over the rows of a table.
std::map<SchemeId, OrderFit> fit_orders(const std::vector<ConvergenceRow>& rows);

/// Checks the realized-mesh invariants for an adaptive run.
bool mesh_invariants_hold(const SolveResult& result, const MeshConfig& config, double t_end);

}  // namespace adaptsde
