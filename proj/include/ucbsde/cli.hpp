#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "io.hpp"
#include "montecarlo.hpp"

namespace ucbsde {

namespace detail {
inline std::string summary_stats(AggregateStats const& stats)
{
    char buf[160];
    if (stats.std_error)
        std::snprintf(buf, sizeof(buf), "mean=%.17g stderr=%.17g reps=%ld", stats.mean,
                      *stats.std_error, stats.count);
    else
        std::snprintf(buf, sizeof(buf), "mean=%.17g stderr=NA reps=%ld", stats.mean, stats.count);
    return buf;
}

// from, from + by, ... up to `to`, each value rounded to 12 significant digits
inline std::vector<double> make_grid(double from, double to, double by)
{
    if (!(by > 0) || !(to >= from) || !std::isfinite(from) || !std::isfinite(to))
        throw std::invalid_argument("grid needs finite --from <= --to and --by > 0");
    auto count = static_cast<long>(std::floor((to - from) / by + 1e-9)) + 1;
    std::vector<double> grid;
    for (long k = 0; k < count; ++k)
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", from + static_cast<double>(k) * by);
        grid.push_back(std::strtod(buf, nullptr));
    }
    return grid;
}

inline void save_outputs(SweepTable const& table, std::string const& csv, std::string const& svg)
{
    write_csv(table, csv);
    if (!svg.empty())
        emit_svg(table, svg);
}
}  // namespace detail

/*!
 * \brief Entry point of the ucbsde command-line tool.
 *
 * Exit codes: 0 on success, 2 for bad arguments, 1 for runtime failures.
 */
inline int cli_main(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"UCB strategy for Gaussian bandits: discrete simulation and SDE limit"};
    app.require_subcommand(1);
    app.fallthrough();

    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: UCBSDE_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    // simulate
    std::vector<double> means, variances;
    long horizon = 0;
    double exploration = 1.0;
    long reps = 10000;
    std::uint64_t seed = 1;
    bool realized = false;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo regret of the discrete UCB rule");
    simulate->add_option("--means", means, "arm means, comma separated")
        ->required()
        ->delimiter(',');
    simulate->add_option("--variances", variances, "arm variances, comma separated")
        ->required()
        ->delimiter(',');
    simulate->add_option("--horizon", horizon, "control horizon N")->required();
    simulate->add_option("--a", exploration, "exploration coefficient");
    simulate->add_option("--reps", reps, "replications");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_flag("--realized", realized, "estimate regret from observed rewards");

    // limit
    std::vector<double> drifts, rel_variances;
    double step = 1e-3;
    auto* limit = app.add_subcommand("limit", "Monte Carlo regret of the SDE limit");
    limit->add_option("--c", drifts, "scaled drifts c_l")->required()->delimiter(',');
    limit->add_option("--d", rel_variances, "relative variances d_l")->required()->delimiter(',');
    limit->add_option("--step", step, "Euler-Maruyama step");
    limit->add_option("--a", exploration, "exploration coefficient");
    limit->add_option("--reps", reps, "replications");
    limit->add_option("--seed", seed, "master seed");

    // sweep-c2
    double from = 0, to = 10, by = 0.2;
    std::vector<std::string> method_texts;
    std::string out_path, svg_path;
    auto* sweep_c2_cmd = app.add_subcommand("sweep-c2", "normalized regret against c2");
    sweep_c2_cmd->add_option("--from", from, "first c2");
    sweep_c2_cmd->add_option("--to", to, "last c2");
    sweep_c2_cmd->add_option("--by", by, "c2 increment");
    sweep_c2_cmd->add_option("--methods", method_texts, "discrete:N and limit:h entries")
        ->required()
        ->delimiter(',');
    sweep_c2_cmd->add_option("--reps", reps, "replications per point");
    sweep_c2_cmd->add_option("--seed", seed, "master seed");
    sweep_c2_cmd->add_option("--out", out_path, "CSV output")->required();
    sweep_c2_cmd->add_option("--svg", svg_path, "SVG chart output");

    // sweep-horizon
    long n_from = 3, n_to = 100;
    double c2 = 3.6;
    auto* sweep_n_cmd = app.add_subcommand("sweep-horizon", "normalized regret against N");
    sweep_n_cmd->add_option("--n-from", n_from, "first horizon");
    sweep_n_cmd->add_option("--n-to", n_to, "last horizon");
    sweep_n_cmd->add_option("--c2", c2, "offset of arm 2");
    sweep_n_cmd->add_option("--reps", reps, "replications per point");
    sweep_n_cmd->add_option("--seed", seed, "master seed");
    sweep_n_cmd->add_option("--out", out_path, "CSV output")->required();
    sweep_n_cmd->add_option("--svg", svg_path, "SVG chart output");

    // find-max / threshold
    std::string in_path;
    std::string method_name;
    double tol = 0.02;
    double limit_value = 0.73;
    auto* find_max_cmd = app.add_subcommand("find-max", "location of the largest regret");
    find_max_cmd->add_option("--in", in_path, "CSV written by a sweep")->required();
    find_max_cmd->add_option("--method", method_name, "method label");
    auto* threshold_cmd = app.add_subcommand("threshold", "smallest acceptable horizon");
    threshold_cmd->add_option("--in", in_path, "CSV written by sweep-horizon")->required();
    threshold_cmd->add_option("--limit", limit_value, "limiting normalized regret");
    threshold_cmd->add_option("--tol", tol, "relative excess allowed")->check(CLI::PositiveNumber);
    threshold_cmd->add_option("--method", method_name, "method label");

    try
    {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    }
    catch (CLI::CallForHelp const&)
    {
        out << app.help();
        return 0;
    }
    catch (CLI::CallForAllHelp const&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    }
    catch (CLI::ParseError const& e)
    {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    unsigned const parallelism = threads ? threads : default_parallelism();
    std::optional<std::string_view> method;
    if (!method_name.empty())
        method = method_name;

    // Validation failures (std::logic_error) are argument errors
    try
    {
        if (simulate->parsed())
        {
            if (means.size() != variances.size())
                throw std::invalid_argument("--means and --variances differ in length");
            DiscreteEngine engine;
            for (std::size_t l = 0; l < means.size(); ++l)
                engine.spec.arms.push_back({means[l], variances[l]});
            engine.spec.horizon = horizon;
            engine.config.exploration = exploration;
            engine.config.estimator = realized ? RegretEstimator::realized : RegretEstimator::pseudo;
            ReplicationTask task{engine, reps, seed, Metric::normalized_regret};
            if (!(engine.spec.max_variance() > 0))
                task.metric = Metric::regret;
            validate(task);
            auto stats = run_replications(task, parallelism);
            out << "simulate "
                << (task.metric == Metric::regret ? "regret " : "normalized_regret ")
                << detail::summary_stats(stats) << '\n';
        }
        else if (limit->parsed())
        {
            LimitEngine engine;
            engine.config.system = {drifts, rel_variances, exploration};
            engine.config.step = step;
            ReplicationTask task{engine, reps, seed, Metric::normalized_regret};
            validate(task);
            auto stats = run_replications(task, parallelism);
            out << "limit normalized_regret " << detail::summary_stats(stats) << '\n';
        }
        else if (sweep_c2_cmd->parsed())
        {
            auto grid = detail::make_grid(from, to, by);
            std::vector<MethodSpec> methods;
            for (auto const& text : method_texts)
                methods.push_back(MethodSpec::parse(text));
            if (reps < 1)
                throw std::invalid_argument("--reps must be at least 1");
            auto table = sweep_c2(grid, methods, reps, seed, parallelism);
            detail::save_outputs(table, out_path, svg_path);
            out << "sweep-c2 rows=" << table.rows.size() << " out=" << out_path << '\n';
        }
        else if (sweep_n_cmd->parsed())
        {
            if (reps < 1)
                throw std::invalid_argument("--reps must be at least 1");
            auto table = sweep_horizon(n_from, n_to, c2, reps, seed, parallelism);
            detail::save_outputs(table, out_path, svg_path);
            out << "sweep-horizon rows=" << table.rows.size() << " out=" << out_path << '\n';
        }
        else if (find_max_cmd->parsed())
        {
            auto table = read_csv(in_path);
            auto best = find_max_regret(table, method);
            char buf[200];
            std::snprintf(buf, sizeof(buf), "find-max x=%.17g regret=%.17g boundary=%s", best.x,
                          best.regret, best.boundary ? "yes" : "no");
            out << buf;
            if (best.fitted_x)
            {
                std::snprintf(buf, sizeof(buf), " fitted_x=%.17g fitted_regret=%.17g",
                              *best.fitted_x, *best.fitted_regret);
                out << buf;
            }
            out << '\n';
        }
        else if (threshold_cmd->parsed())
        {
            auto table = read_csv(in_path);
            auto n_star = find_threshold_horizon(table, limit_value, tol, method);
            out << "threshold N_star=" << (n_star ? std::to_string(*n_star) : "none") << '\n';
        }
    }
    catch (std::logic_error const& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace ucbsde
