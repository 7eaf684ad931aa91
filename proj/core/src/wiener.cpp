#include "adaptsde/wiener.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace adaptsde {

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t sample_index)
{
    // splitmix64 finalizer so neighbouring indices give unrelated streams.
    std::uint64_t z = master_seed ^ sample_index;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

WienerPath::WienerPath(int dim, std::uint64_t seed) : dim_(dim), rng_(seed)
{
    if (dim < 1) throw std::invalid_argument("WienerPath: dimension must be positive");
    index_.emplace(0.0, 0);
    values_.assign(static_cast<std::size_t>(dim_), 0.0);
}

std::size_t WienerPath::add_knot(double t)
{
    std::vector<double> w(static_cast<std::size_t>(dim_));
    auto next = index_.lower_bound(t);
    if (next == index_.end()) {
        const auto& [t_last, slot] = *index_.rbegin();
        const double sd = std::sqrt(t - t_last);
        const double* base = knot_value(slot);
        for (int i = 0; i < dim_; ++i) w[i] = base[i] + sd * normal_(rng_);
    } else {
        auto prev = std::prev(next);
        const double ta = prev->first, tb = next->first;
        const double* wa = knot_value(prev->second);
        const double* wb = knot_value(next->second);
        const double span = tb - ta;
        const double frac = (t - ta) / span;
        const double sd = std::sqrt((t - ta) * (tb - t) / span);
        for (int i = 0; i < dim_; ++i) w[i] = wa[i] + frac * (wb[i] - wa[i]) + sd * normal_(rng_);
    }
    const std::size_t slot = index_.size();
    values_.insert(values_.end(), w.begin(), w.end());
    index_.emplace(t, slot);
    return slot;
}

Vector WienerPath::value_at(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("WienerPath::value_at: time must be finite and >= 0");
    auto it = index_.find(t);
    const std::size_t slot = it != index_.end() ? it->second : add_knot(t);
    return Eigen::Map<const Vector>(knot_value(slot), dim_);
}

Vector WienerPath::increment(double t_a, double t_b)
{
    if (t_a > t_b) throw std::invalid_argument("WienerPath::increment: t_a > t_b");
    if (t_a == t_b) {
        value_at(t_a);
        return Vector::Zero(dim_);
    }
    const Vector wa = value_at(t_a);
    return value_at(t_b) - wa;
}

std::vector<double> WienerPath::refine_uniform(const std::vector<double>& times, int levels)
{
    if (levels < 0) throw std::invalid_argument("refine_uniform: levels must be >= 0");
    if (times.empty()) return {};
    const std::size_t parts = std::size_t{1} << levels;
    std::vector<double> fine;
    fine.reserve((times.size() - 1) * parts + 1);
    value_at(times.front());
    fine.push_back(times.front());
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double ta = times[k], tb = times[k + 1];
        value_at(tb);
        // Insert coarse-to-fine so every new knot is a bridge between existing ones.
        std::vector<double> level_pts(parts + 1);
        level_pts[0] = ta;
        level_pts[parts] = tb;
        for (std::size_t stride = parts; stride > 1; stride /= 2) {
            for (std::size_t j = stride / 2; j < parts; j += stride) {
                const double tm = 0.5 * (level_pts[j - stride / 2] + level_pts[j + stride / 2]);
                level_pts[j] = tm;
                value_at(tm);
            }
        }
        fine.insert(fine.end(), level_pts.begin() + 1, level_pts.end());
    }
    return fine;
}

std::vector<double> WienerPath::refine_uniform(const std::vector<StepRecord>& mesh, double t_end,
                                               int levels)
{
    return refine_uniform(mesh_times(mesh, t_end), levels);
}

Matrix WienerPath::increments(const std::vector<double>& times)
{
    const Eigen::Index n = times.empty() ? 0 : static_cast<Eigen::Index>(times.size() - 1);
    Matrix dW(dim_, n);
    if (times.empty()) return dW;
    Vector prev = value_at(times[0]);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (times[k + 1] < times[k]) throw std::invalid_argument("increments: times not ordered");
        Vector cur = value_at(times[k + 1]);
        dW.col(k) = cur - prev;
        prev = std::move(cur);
    }
    return dW;
}

void WienerPath::write_csv(std::ostream& os) const
{
    os << "time";
    for (int i = 1; i <= dim_; ++i) os << ",w_" << i;
    os << '\n' << std::setprecision(17);
    for (const auto& [t, slot] : index_) {
        os << t;
        const double* w = knot_value(slot);
        for (int i = 0; i < dim_; ++i) os << ',' << w[i];
        os << '\n';
    }
}

}  // namespace adaptsde
