#include "adaptsde/harness.hpp"

#include "adaptsde/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace adaptsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neumaier compensated sum.
double compensated_sum(const std::vector<StepRecord>& mesh)
{
    double sum = 0.0, comp = 0.0;
    for (const auto& r : mesh) {
        const double t = sum + r.h;
        comp += std::abs(sum) >= std::abs(r.h) ? (sum - t) + r.h : (r.h - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::vector<double> reference_coarse_grid(const SolveResult& adaptive, double h_max, double t_end)
{
    std::vector<double> times = mesh_times(adaptive.mesh, t_end);
    if (!adaptive.diverged) return times;
    // Diverged before t_end: continue the grid with h_max steps.
    times.pop_back();
    double t = adaptive.mesh.empty() ? 0.0 : adaptive.mesh.back().t_start + adaptive.mesh.back().h;
    times.push_back(t);
    while (t_end - t > 1e-12 * t_end) {
        t = std::min(t + h_max, t_end);
        times.push_back(t);
    }
    times.back() = t_end;
    return times;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults_for(const std::string& problem)
{
    ExperimentConfig c;
    c.problem = problem;
    c.h_max_list = {0.25, 0.025, 0.0025, 0.00025};
    if (problem == "spde") {
        c.h_max_list = {0.25, 0.05, 0.005, 0.0005};
        c.refine_levels = 4;
    }
    c.schemes = {SchemeId::adaptive_semi_implicit, SchemeId::drift_implicit, SchemeId::balanced,
                 SchemeId::increment_tamed, SchemeId::fully_tamed};
    if (problem == "gl") c.schemes.push_back(SchemeId::truncated);
    return c;
}

void ExperimentConfig::validate() const
{
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (h_max_list.empty()) throw std::invalid_argument("h_max list is empty");
    for (double h : h_max_list) MeshConfig(h, rho);
    if (refine_levels < 1 || refine_levels > 20) throw std::invalid_argument("refine levels must lie in [1, 20]");
    if (t_end && !(*t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (schemes.empty()) throw std::invalid_argument("scheme list is empty");
}

int default_worker_count()
{
    if (const char* env = std::getenv("ADAPTSDE_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void IncrementMoments::merge(const IncrementMoments& o)
{
    sum_z += o.sum_z;
    sum_sq_ratio += o.sum_sq_ratio;
    n_steps += o.n_steps;
    m = std::max(m, o.m);
}

double IncrementMoments::mean_z() const
{
    return n_steps ? sum_z / static_cast<double>(n_steps * static_cast<std::size_t>(m)) : kNaN;
}

double IncrementMoments::mean_sq_ratio() const
{
    return n_steps ? sum_sq_ratio / static_cast<double>(n_steps) : kNaN;
}

bool mesh_invariants_hold(const SolveResult& result, const MeshConfig& config, double t_end)
{
    const auto& mesh = result.mesh;
    if (mesh.empty()) return false;
    const double tol = 1e-12;
    const double h_min = config.h_min(), h_max = config.h_max();
    for (std::size_t n = 0; n + 1 < mesh.size(); ++n) {
        const auto& r = mesh[n];
        if (r.h < h_min * (1 - tol) || r.h > h_max * (1 + tol)) return false;
        if (r.origin == StepOrigin::backstop && std::abs(r.h - h_min) > tol * h_min) return false;
    }
    if (mesh.back().h > h_max * (1 + tol) + tol * t_end) return false;
    if (result.diverged) return true;
    if (std::abs(compensated_sum(mesh) - t_end) > tol * t_end) return false;
    const auto n_min = static_cast<std::size_t>(std::floor(t_end / h_max * (1 + tol)));
    const auto n_max = static_cast<std::size_t>(std::ceil(t_end / h_min * (1 - tol))) + 1;
    return mesh.size() >= n_min && mesh.size() <= n_max;
}

SampleRecord run_sample(const SdeProblem& problem, const ExperimentConfig& config,
                        std::size_t sample_index, double h_max)
{
    SdeProblem p = problem;
    if (config.t_end) p.t_end = *config.t_end;
    const double T = p.t_end;
    const MeshConfig mesh_config(h_max, config.rho);
    const auto& opt = config.solve_options;

    SampleRecord rec;
    rec.sample_index = sample_index;
    rec.h_max = h_max;

    WienerPath path(p.m, sample_seed(config.seed, sample_index));

    auto checksum_error = [&](const SolveResult& r) {
        if (r.diverged) return 0.0;
        return (r.noise_sum - path.value_at(T)).cwiseAbs().maxCoeff();
    };
    auto record = [&](SchemeId id, const SolveResult& r) {
        SchemeSample s{id, kNaN, r.wall_time, r.n_steps, r.n_backstop, r.diverged, 0.0};
        if (!r.diverged && rec.reference_ok) s.sq_error = terminal_error(r.y_terminal, rec.reference);
        s.path_checksum_error = checksum_error(r);
        rec.schemes.push_back(s);
    };

    // Canonical query order: adaptive runs, reference refinement, fixed grid.
    const SolveResult adaptive =
        solve(p, SchemeId::adaptive_semi_implicit, path, AdaptivePlan{mesh_config}, opt);
    rec.mean_adaptive_h = adaptive.mean_h;
    rec.adaptive_steps = adaptive.n_steps;
    rec.mesh_ok = mesh_invariants_hold(adaptive, mesh_config, T);

    rec.moments.m = p.m;
    if (!adaptive.diverged) {
        const auto times = mesh_times(adaptive.mesh, T);
        for (std::size_t n = 0; n + 1 < times.size(); ++n) {
            const double h = times[n + 1] - times[n];
            const Vector dW = path.increment(times[n], times[n + 1]);
            rec.moments.sum_z += dW.sum() / std::sqrt(h);
            rec.moments.sum_sq_ratio += dW.squaredNorm() / h;
            ++rec.moments.n_steps;
        }
    }

    std::optional<SolveResult> adaptive_explicit;
    if (std::find(config.schemes.begin(), config.schemes.end(), SchemeId::adaptive_explicit)
        != config.schemes.end())
        adaptive_explicit = solve(p, SchemeId::adaptive_explicit, path, AdaptivePlan{mesh_config}, opt);

    const auto fine = path.refine_uniform(reference_coarse_grid(adaptive, h_max, T),
                                          config.refine_levels);
    const Matrix fine_dW = path.increments(fine);
    const SolveResult reference = solve_on_grid(p, SchemeId::balanced, fine, fine_dW, opt);
    rec.reference = reference.y_terminal;
    rec.reference_ok = !reference.diverged;

    const double mean_h = adaptive.diverged || adaptive.mean_h <= 0.0 ? h_max : adaptive.mean_h;
    const auto n_uniform = static_cast<std::size_t>(std::max(1.0, std::round(T / mean_h)));
    rec.uniform_h = T / static_cast<double>(n_uniform);
    std::vector<double> grid(n_uniform + 1);
    for (std::size_t k = 0; k < n_uniform; ++k)
        grid[k] = static_cast<double>(k) * T / static_cast<double>(n_uniform);
    grid[n_uniform] = T;
    const Matrix grid_dW = path.increments(grid);

    for (SchemeId id : config.schemes) {
        if (id == SchemeId::adaptive_semi_implicit) {
            record(id, adaptive);
        } else if (id == SchemeId::adaptive_explicit) {
            record(id, *adaptive_explicit);
        } else {
            record(id, solve_on_grid(p, id, grid, grid_dW, opt));
        }
    }
    return rec;
}

RmseResult rmse(std::span<const double> squared_errors)
{
    RmseResult r;
    double sum = 0.0;
    for (double e : squared_errors) {
        if (std::isfinite(e)) {
            sum += e;
            ++r.n_used;
        } else {
            ++r.n_excluded;
        }
    }
    r.ok = r.n_used > 0;
    r.value = r.ok ? std::sqrt(sum / static_cast<double>(r.n_used)) : kNaN;
    return r;
}

OrderFit fit_order(std::span<const double> h_max, std::span<const double> rmse_values)
{
    if (h_max.size() != rmse_values.size()) throw std::invalid_argument("fit_order: size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < h_max.size(); ++i) {
        if (h_max[i] > 0.0 && rmse_values[i] > 0.0 && std::isfinite(rmse_values[i])) {
            xs.push_back(std::log(h_max[i]));
            ys.push_back(std::log(rmse_values[i]));
        }
    }
    OrderFit fit;
    fit.n_points = xs.size();
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.ok = true;
    return fit;
}

std::map<SchemeId, OrderFit> fit_orders(const std::vector<ConvergenceRow>& rows)
{
    std::map<SchemeId, std::pair<std::vector<double>, std::vector<double>>> points;
    for (const auto& r : rows) {
        points[r.scheme].first.push_back(r.h_max);
        points[r.scheme].second.push_back(r.rmse);
    }
    std::map<SchemeId, OrderFit> fits;
    for (const auto& [id, pts] : points) fits[id] = fit_order(pts.first, pts.second);
    return fits;
}

ConvergenceTable run_experiment(const SdeProblem& problem, const ExperimentConfig& config)
{
    config.validate();
    for (SchemeId id : config.schemes) {
        if (id == SchemeId::truncated && !problem.supports_truncation())
            throw std::invalid_argument("truncated scheme is not defined for " + problem.name);
        if (id == SchemeId::drift_implicit && !problem.has_jacobian())
            throw std::invalid_argument("drift-implicit needs a Jacobian for " + problem.name);
    }

    ConvergenceTable table;
    table.problem = config.problem.empty() ? problem.name : config.problem;
    const int workers = config.workers > 0 ? config.workers : default_worker_count();
    const auto M = static_cast<std::size_t>(config.samples);

    for (double h_max : config.h_max_list) {
        std::vector<SampleRecord> records(M);
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(M);
        auto work = [&] {
            for (std::size_t i = next++; i < M; i = next++) {
                try {
                    records[i] = run_sample(problem, config, i, h_max);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        {
            std::vector<std::jthread> pool;
            const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), M);
            for (std::size_t w = 1; w < n_threads; ++w) pool.emplace_back(work);
            work();
        }

        // Deterministic reduce in sample order.
        double mean_h = 0.0;
        std::size_t n_ok = 0;
        for (std::size_t i = 0; i < M; ++i) {
            if (errors[i]) continue;
            const auto& rec = records[i];
            mean_h += rec.mean_adaptive_h;
            ++n_ok;
            table.moments.merge(rec.moments);
            if (!rec.mesh_ok) ++table.mesh_violations;
            if (!rec.reference_ok) ++table.invalid_references;
            for (const auto& s : rec.schemes)
                table.max_path_checksum_error = std::max(table.max_path_checksum_error, s.path_checksum_error);
        }
        mean_h = n_ok ? mean_h / static_cast<double>(n_ok) : kNaN;

        for (std::size_t k = 0; k < config.schemes.size(); ++k) {
            ConvergenceRow row;
            row.problem = table.problem;
            row.scheme = config.schemes[k];
            row.h_max = h_max;
            row.rho = config.rho;
            row.samples = config.samples;
            row.mean_adaptive_h = mean_h;
            std::vector<double> errs;
            double time = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                if (errors[i]) {
                    errs.push_back(kNaN);
                    ++row.n_diverged;
                    continue;
                }
                const auto& s = records[i].schemes[k];
                errs.push_back(s.sq_error);
                time += s.wall_time;
                row.n_backstop += s.n_backstop;
                if (s.diverged) ++row.n_diverged;
            }
            row.rmse = rmse(errs).value;
            row.mean_cputime_s = time / static_cast<double>(M);
            table.rows.push_back(row);
        }
    }
    table.order = fit_orders(table.rows);
    return table;
}

ConvergenceTable run_experiment(const ExperimentConfig& config)
{
    auto problem = problems::by_name(config.problem);
    if (!problem) throw std::invalid_argument("unknown problem: " + config.problem);
    return run_experiment(*problem, config);
}

}  // namespace adaptsde
