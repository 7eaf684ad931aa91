#pragma once

#include "adaptsde/core.hpp"

namespace adaptsde {

struct StepDecision {
    double h = 0.0;
    bool use_backstop = false;
    double raw_proposal = 0.0;
};

/// Drift-based admissible step rule
///
///   raw = h_max * min{ max{ 1/||f(y)||, ||y||/||f(y)|| }, 1 }
///
/// clamped to [h_min, h_max]. A proposal at or below h_min selects the
/// backstop, which then runs over exactly h_min. f_y must already be f(y).
/// Throws std::domain_error on non-finite input.
StepDecision propose_step(const Vector& y, const Vector& f_y, const MeshConfig& config);

}  // namespace adaptsde
