#include "adaptsde/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace adaptsde {

StepDecision propose_step(const Vector& y, const Vector& f_y, const MeshConfig& config)
{
    if (!y.allFinite() || !f_y.allFinite())
        throw std::domain_error("propose_step: non-finite state or drift");

    const double h_max = config.h_max();
    const double h_min = config.h_min();
    const double f_norm = f_y.norm();
    if (f_norm == 0.0) return {h_max, false, h_max};

    const double ratio = std::max(1.0 / f_norm, y.norm() / f_norm);
    const double raw = h_max * std::min(ratio, 1.0);
    if (raw <= h_min) return {h_min, true, raw};
    return {raw, false, raw};
}

}  // namespace adaptsde
