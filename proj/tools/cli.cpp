#include "cli.hpp"

#include "adaptsde/control.hpp"
#include "adaptsde/harness.hpp"
#include "adaptsde/problems.hpp"
#include "adaptsde/report.hpp"
#include "adaptsde/schemes.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace adaptsde::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string join_names(auto&& names)
{
    std::string s;
    for (const auto& n : names) {
        if (!s.empty()) s += ", ";
        s += std::string(n);
    }
    return s;
}

std::vector<std::string_view> scheme_names()
{
    std::vector<std::string_view> v;
    for (auto id : all_schemes()) v.push_back(scheme_name(id));
    return v;
}

SdeProblem problem_or_throw(const std::string& name)
{
    auto p = problems::by_name(name);
    if (!p) throw UsageError("unknown problem '" + name + "'; candidates: " + join_names(problems::names()));
    return *p;
}

SchemeId scheme_or_throw(const std::string& name)
{
    auto s = parse_scheme(name);
    if (!s) throw UsageError("unknown scheme '" + name + "'; candidates: " + join_names(scheme_names()));
    return *s;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_doubles(const std::string& s)
{
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size()) throw UsageError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

// key=value lines become --key=value tokens placed before the user's flags,
// so flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.empty()) return args;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::vector<std::string> extra;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
        auto trim = [](std::string v) {
            const auto a = v.find_first_not_of(" \t\r");
            const auto b = v.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : v.substr(a, b - a + 1);
        };
        extra.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
    }
    std::vector<std::string> out{args[0]};
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

struct RunArgs {
    std::string problem;
    std::string scheme = "adaptive-si";
    double hmax = 0.25;
    double rho = 100.0;
    std::uint64_t seed = 1;
    double beta = 0.5;
    double t_end = 0.0;
    std::string trajectory_out;
    std::string steps_out;
};

struct ConvergenceArgs {
    std::string problem;
    std::string schemes;
    std::string hmax_list;
    int samples = 100;
    double rho = 100.0;
    std::uint64_t seed = 20180101;
    int refine = 0;
    int workers = 0;
    std::string out = "convergence.csv";
    bool omit_timing = false;
};

struct PlotArgs {
    std::string in;
    std::string x = "hmax";
    std::string out = "convergence.svg";
    std::string title;
};

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    return os;
}

void cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err)
{
    SdeProblem p = problem_or_throw(a.problem);
    const SchemeId scheme = scheme_or_throw(a.scheme);
    if (a.t_end > 0.0) p.t_end = a.t_end;
    if (scheme == SchemeId::truncated && !p.supports_truncation())
        throw UsageError("scheme truncated is only defined for: gl");

    std::optional<MeshConfig> config;
    try {
        config.emplace(a.hmax, a.rho);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (is_adaptive(scheme)) {
        const auto bound = validate_hmax_bound(p, *config);
        if (bound.verdict != BoundVerdict::holds) err << bound.diagnostic << '\n';
    }

    SolveOptions opt;
    opt.beta = a.beta;
    opt.record_trajectory = !a.trajectory_out.empty();
    WienerPath path(p.m, sample_seed(a.seed, 0));
    const StepPlan plan = is_adaptive(scheme) ? StepPlan{AdaptivePlan{*config}}
                                               : StepPlan{GridPlan{uniform_grid(p.t_end, a.hmax)}};
    const SolveResult r = solve(p, scheme, path, plan, opt);

    out << std::setprecision(10) << "problem=" << p.name << " scheme=" << scheme_name(scheme)
        << " h_max=" << a.hmax << " rho=" << a.rho << " seed=" << a.seed << " steps=" << r.n_steps
        << " mean_h=" << r.mean_h << " backstop=" << r.n_backstop << " diverged=" << (r.diverged ? 1 : 0)
        << " y_T=";
    for (Eigen::Index i = 0; i < r.y_terminal.size(); ++i) out << (i ? ";" : "") << r.y_terminal[i];
    out << '\n';

    if (!a.trajectory_out.empty()) {
        auto os = open_out(a.trajectory_out);
        os << "t";
        for (int i = 1; i <= p.d; ++i) os << ",y_" << i;
        os << '\n' << std::setprecision(17);
        for (const auto& pt : *r.trajectory) {
            os << pt.t;
            for (Eigen::Index i = 0; i < pt.y.size(); ++i) os << ',' << pt.y[i];
            os << '\n';
        }
    }
    if (!a.steps_out.empty()) {
        auto os = open_out(a.steps_out);
        os << "t,h\n" << std::setprecision(17);
        for (const auto& s : r.mesh) os << s.t_start << ',' << s.h << '\n';
    }
}

void cmd_convergence(const ConvergenceArgs& a, std::ostream& out, std::ostream& err)
{
    problem_or_throw(a.problem);
    ExperimentConfig cfg = ExperimentConfig::defaults_for(a.problem);
    if (!a.schemes.empty()) {
        cfg.schemes.clear();
        for (const auto& s : split_list(a.schemes)) cfg.schemes.push_back(scheme_or_throw(s));
    }
    if (!a.hmax_list.empty()) cfg.h_max_list = parse_doubles(a.hmax_list);
    cfg.samples = a.samples;
    cfg.rho = a.rho;
    cfg.seed = a.seed;
    if (a.refine > 0) cfg.refine_levels = a.refine;
    cfg.workers = a.workers;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    // Fail on the output path before spending time on the sweep.
    auto os = open_out(a.out);
    ConvergenceTable table;
    try {
        table = run_experiment(cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    write_csv(os, table, {.omit_timing = a.omit_timing});
    os.flush();
    if (!os) throw IoError("failed writing " + a.out);

    out << std::setprecision(4) << std::fixed;
    for (const auto& [id, fit] : table.order) {
        out << scheme_name(id) << ": order_slope=";
        if (fit.ok) out << fit.slope << " r2=" << fit.r2;
        else out << "insufficient-data";
        out << '\n';
    }
    std::size_t backstops = 0;
    for (const auto& r : table.rows)
        if (r.scheme == SchemeId::adaptive_semi_implicit || r.scheme == SchemeId::drift_implicit)
            backstops += r.n_backstop;
    out << "adaptive_steps=" << table.moments.n_steps << " mean_dW_over_sqrt_h=" << std::setprecision(6)
        << table.moments.mean_z() << " mean_sq_dW_over_h=" << table.moments.mean_sq_ratio() << '\n';
    if (backstops > 0)
        err << "warning: backstop used " << backstops << " times by adaptive or drift-implicit runs\n";
    if (table.mesh_violations > 0) err << "warning: " << table.mesh_violations << " mesh invariant violations\n";
}

void cmd_plot(const PlotArgs& a, std::ostream& out)
{
    std::ifstream in(a.in);
    if (!in) throw IoError("cannot read " + a.in);
    if (a.x != "hmax" && a.x != "cputime") throw UsageError("--x must be hmax or cputime");
    const auto rows = read_csv(in);
    const auto svg = render_svg(rows, a.x == "hmax" ? PlotAxis::h_max : PlotAxis::cputime, a.title);
    auto os = open_out(a.out);
    os << svg;
    if (!os) throw IoError("failed writing " + a.out);
    out << "wrote " << a.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Adaptive semi-implicit SDE integration and strong-convergence experiments", "adaptsde"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_path;

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Integrate one sample path and print a summary");
    run_cmd->add_option("--problem", ra.problem, "gbm | fhn05 | fhn01 | gl | svol | spde")->required();
    run_cmd->add_option("--scheme", ra.scheme, "Scheme name (see list-schemes)")->capture_default_str();
    run_cmd->add_option("--hmax", ra.hmax, "Maximum step (fixed step for non-adaptive schemes)")->capture_default_str();
    run_cmd->add_option("--rho", ra.rho, "Ratio h_max / h_min")->capture_default_str();
    run_cmd->add_option("--seed", ra.seed, "Random seed")->capture_default_str();
    run_cmd->add_option("--beta", ra.beta, "Fully tamed exponent")->capture_default_str();
    run_cmd->add_option("--t-end", ra.t_end, "Override the problem horizon (0 keeps it)")->capture_default_str();
    run_cmd->add_option("--trajectory-out", ra.trajectory_out, "CSV t,y_1,...,y_d");
    run_cmd->add_option("--steps-out", ra.steps_out, "CSV t,h of the realized mesh");
    run_cmd->add_option("--config", config_path, "key=value file; flags override it");

    ConvergenceArgs ca;
    auto* conv_cmd = app.add_subcommand("convergence", "Monte-Carlo strong convergence sweep");
    conv_cmd->add_option("--problem", ca.problem, "Problem name")->required();
    conv_cmd->add_option("--schemes", ca.schemes, "Comma-separated schemes (default: per problem)");
    conv_cmd->add_option("--hmax-list", ca.hmax_list, "Comma-separated h_max values (default: per problem)");
    conv_cmd->add_option("--samples", ca.samples, "Monte-Carlo samples per h_max")->capture_default_str();
    conv_cmd->add_option("--rho", ca.rho, "Ratio h_max / h_min")->capture_default_str();
    conv_cmd->add_option("--seed", ca.seed, "Master seed")->capture_default_str();
    conv_cmd->add_option("--refine", ca.refine, "Bisection levels for the reference (default 6, spde 4)");
    conv_cmd->add_option("--workers", ca.workers, "Worker threads (default ADAPTSDE_WORKERS or all cores)");
    conv_cmd->add_option("--out", ca.out, "Output CSV")->capture_default_str();
    conv_cmd->add_flag("--omit-timing", ca.omit_timing, "Leave mean_cputime_s blank");
    conv_cmd->add_option("--config", config_path, "key=value file; flags override it");

    PlotArgs pa;
    auto* plot_cmd = app.add_subcommand("plot", "Render a convergence CSV as a log-log SVG");
    plot_cmd->add_option("--in", pa.in, "Convergence CSV")->required();
    plot_cmd->add_option("--x", pa.x, "hmax | cputime")->capture_default_str();
    plot_cmd->add_option("--out", pa.out, "Output SVG")->capture_default_str();
    plot_cmd->add_option("--title", pa.title, "Plot title");
    plot_cmd->add_option("--config", config_path, "key=value file; flags override it");

    auto* list_problems = app.add_subcommand("list-problems", "List problem names");
    auto* list_schemes = app.add_subcommand("list-schemes", "List scheme names");

    try {
        auto args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return bad_arguments;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return bad_arguments;
    }

    try {
        if (*run_cmd) cmd_run(ra, out, err);
        else if (*conv_cmd) cmd_convergence(ca, out, err);
        else if (*plot_cmd) cmd_plot(pa, out);
        else if (*list_problems) for (auto n : problems::names()) out << n << '\n';
        else if (*list_schemes) for (auto n : scheme_names()) out << n << '\n';
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return bad_arguments;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const MalformedCsv& e) {
        err << "error: " << e.what() << '\n';
        return malformed_input;
    }
    return ok;
}

}  // namespace adaptsde::cli
