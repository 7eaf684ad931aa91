#pragma once

#include "adaptsde/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <vector>

namespace adaptsde {

/// Per-path seed derived from an experiment seed and a sample index.
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t sample_index);

/// Refinable m-dimensional Brownian path.
///
/// Values are materialized lazily: queries past the last knot draw a forward
/// Gaussian increment, queries between knots draw from the Brownian bridge.
/// Existing knots never change. The realized path depends on the query
/// sequence, so callers that need reproducibility must query in a fixed order.
class WienerPath {
public:
    WienerPath(int dim, std::uint64_t seed);

    int dim() const { return dim_; }
    std::size_t knot_count() const { return index_.size(); }
    double last_time() const { return index_.rbegin()->first; }

    Vector value_at(double t);
    Vector increment(double t_a, double t_b);

    /// Bisects every interval of `times` `levels` times and materializes the
    /// midpoints. Returns the refined grid (2^levels sub-intervals per interval).
    std::vector<double> refine_uniform(const std::vector<double>& times, int levels);

    /// Same, for the grid of a realized mesh.
    std::vector<double> refine_uniform(const std::vector<StepRecord>& mesh, double t_end,
                                       int levels);

    /// Increments over consecutive grid points, one column per interval.
    Matrix increments(const std::vector<double>& times);

    /// CSV dump `time,w_1,...,w_m` of every knot.
    void write_csv(std::ostream& os) const;

private:
    const double* knot_value(std::size_t slot) const { return values_.data() + slot * dim_; }
    std::size_t add_knot(double t);

    int dim_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::map<double, std::size_t> index_;
    std::vector<double> values_;
};

}  // namespace adaptsde
