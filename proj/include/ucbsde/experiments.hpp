#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bandit.hpp"
#include "montecarlo.hpp"
#include "sde.hpp"

namespace ucbsde {

//---------------------------------------------------------------------------//
// Tables
//---------------------------------------------------------------------------//

struct SweepRow
{
    double x = 0;
    std::string method;
    double mean = 0;
    std::optional<double> std_error;
    long reps = 1;

    friend bool operator==(SweepRow const&, SweepRow const&) = default;
};

/*!
 * \brief Rows of an experiment plus the configuration that produced them.
 *
 * Metadata is an ordered list of key/value pairs. The key "x" names the
 * swept variable.
 */
struct SweepTable
{
    std::vector<SweepRow> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::string x_name() const
    {
        for (auto const& [key, value] : metadata)
        {
            if (key == "x")
                return value;
        }
        return "x";
    }

    //! Methods in order of first appearance
    std::vector<std::string> methods() const
    {
        std::vector<std::string> result;
        for (auto const& row : rows)
        {
            if (std::find(result.begin(), result.end(), row.method) == result.end())
                result.push_back(row.method);
        }
        return result;
    }

    std::vector<SweepRow> rows_for(std::string_view method) const
    {
        std::vector<SweepRow> result;
        for (auto const& row : rows)
        {
            if (row.method == method)
                result.push_back(row);
        }
        return result;
    }

    void sort_rows()
    {
        std::stable_sort(rows.begin(), rows.end(), [](SweepRow const& a, SweepRow const& b) {
            if (a.method != b.method)
                return a.method < b.method;
            return a.x < b.x;
        });
    }

    friend bool operator==(SweepTable const&, SweepTable const&) = default;
};

//! Shortest decimal text that reads back to the same double
inline std::string format_double(double value)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general);
    return std::string(buf, end);
}

//---------------------------------------------------------------------------//
// Method descriptors
//---------------------------------------------------------------------------//

/*!
 * \brief Engine choice for a two-armed sweep: "discrete:N" or "limit:h".
 */
struct MethodSpec
{
    enum class Kind
    {
        discrete,
        limit
    };

    Kind kind = Kind::discrete;
    long horizon = 0;  //!< discrete only
    double step = 0;   //!< limit only
    std::string label;

    static MethodSpec discrete(long horizon)
    {
        return {Kind::discrete, horizon, 0, "discrete@N=" + std::to_string(horizon)};
    }

    static MethodSpec limit(double step, std::string step_text = {})
    {
        if (step_text.empty())
            step_text = format_double(step);
        return {Kind::limit, 0, step, "limit@h=" + step_text};
    }

    //! Parse "discrete:200" or "limit:1e-3"; throws std::invalid_argument.
    static MethodSpec parse(std::string_view text)
    {
        auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw std::invalid_argument("method '" + std::string(text)
                                        + "' must look like discrete:N or limit:h");
        auto kind = text.substr(0, colon);
        auto arg = std::string(text.substr(colon + 1));
        std::size_t used = 0;
        try
        {
            if (kind == "discrete")
            {
                long n = std::stol(arg, &used);
                if (used == arg.size() && n >= 2)
                    return discrete(n);
            }
            else if (kind == "limit")
            {
                double h = std::stod(arg, &used);
                if (used == arg.size() && h > 0 && h < 0.5)
                    return limit(h, arg);
            }
        }
        catch (std::logic_error const&)
        {
        }
        throw std::invalid_argument("bad method descriptor '" + std::string(text) + "'");
    }
};

//---------------------------------------------------------------------------//
// Sweeps
//---------------------------------------------------------------------------//

//! Two-armed task for offsets (0, c2) with unit variances and a = 1.
inline ReplicationTask
two_armed_task(MethodSpec const& method, double c2, long reps, std::uint64_t seed)
{
    ReplicationTask task;
    task.replications = reps;
    task.master_seed = seed;
    if (method.kind == MethodSpec::Kind::discrete)
    {
        double const offsets[] = {0.0, c2};
        auto means = close_means(0.0, offsets, 1.0, method.horizon);
        DiscreteEngine engine;
        engine.spec.arms = {{means[0], 1.0}, {means[1], 1.0}};
        engine.spec.horizon = method.horizon;
        task.engine = engine;
    }
    else
    {
        LimitEngine engine;
        engine.config.system = {{0.0, c2}, {1.0, 1.0}, 1.0};
        engine.config.step = method.step;
        task.engine = engine;
    }
    return task;
}

inline SweepRow make_row(double x, std::string method, AggregateStats const& stats)
{
    return {x, std::move(method), stats.mean, stats.std_error, stats.count};
}

/*!
 * \brief Normalized regret against the arm-2 offset c2, for each method.
 *
 * Every grid point reuses the same master seed, so replication i sees the
 * same noise stream at every point.
 */
inline SweepTable sweep_c2(std::span<double const> grid,
                           std::span<MethodSpec const> methods,
                           long reps,
                           std::uint64_t seed,
                           unsigned parallelism = default_parallelism())
{
    if (grid.empty())
        throw std::domain_error("sweep_c2: empty grid");
    if (methods.empty())
        throw std::domain_error("sweep_c2: no methods");
    for (double c2 : grid)
    {
        if (!(c2 >= 0) || !std::isfinite(c2))
            throw std::domain_error("sweep_c2: grid values must be finite and >= 0");
    }

    SweepTable table;
    std::string grid_text, method_text;
    for (double c2 : grid)
        grid_text += (grid_text.empty() ? "" : ",") + format_double(c2);
    for (auto const& m : methods)
        method_text += (method_text.empty() ? "" : ",") + m.label;
    table.metadata = {{"experiment", "sweep-c2"},
                      {"x", "c2"},
                      {"a", "1"},
                      {"D", "1"},
                      {"baseline", "0"},
                      {"grid", grid_text},
                      {"methods", method_text},
                      {"reps", std::to_string(reps)},
                      {"seed", std::to_string(seed)}};

    for (auto const& method : methods)
    {
        for (double c2 : grid)
        {
            auto stats = run_replications(two_armed_task(method, c2, reps, seed), parallelism);
            table.rows.push_back(make_row(c2, method.label, stats));
        }
    }
    table.sort_rows();
    return table;
}

/*!
 * \brief Discrete normalized regret against the horizon, at offset c2.
 */
inline SweepTable sweep_horizon(long n_from,
                                long n_to,
                                double c2,
                                long reps,
                                std::uint64_t seed,
                                unsigned parallelism = default_parallelism())
{
    if (n_from < 2)
        throw std::domain_error("sweep_horizon: horizon must cover the two forced pulls");
    if (n_to < n_from)
        throw std::domain_error("sweep_horizon: empty horizon range");

    SweepTable table;
    std::string const label = "discrete@c2=" + format_double(c2);
    table.metadata = {{"experiment", "sweep-horizon"},
                      {"x", "N"},
                      {"a", "1"},
                      {"D", "1"},
                      {"baseline", "0"},
                      {"c2", format_double(c2)},
                      {"n_from", std::to_string(n_from)},
                      {"n_to", std::to_string(n_to)},
                      {"reps", std::to_string(reps)},
                      {"seed", std::to_string(seed)}};

    for (long n = n_from; n <= n_to; ++n)
    {
        auto stats = run_replications(two_armed_task(MethodSpec::discrete(n), c2, reps, seed),
                                      parallelism);
        table.rows.push_back(make_row(static_cast<double>(n), label, stats));
    }
    table.sort_rows();
    return table;
}

//---------------------------------------------------------------------------//
// Summaries
//---------------------------------------------------------------------------//

struct MaxRegret
{
    double x = 0;
    double regret = 0;
    bool boundary = false;
    //! vertex of the parabola through the maximum and its neighbours
    std::optional<double> fitted_x;
    std::optional<double> fitted_regret;
};

namespace detail {
inline std::vector<SweepRow>
select_rows(SweepTable const& table, std::optional<std::string_view> method)
{
    if (method)
        return table.rows_for(*method);
    auto methods = table.methods();
    if (methods.size() > 1)
        throw std::domain_error("table holds several methods; name one");
    return table.rows;
}
}  // namespace detail

/*!
 * \brief Grid point with the largest mean regret for one method.
 *
 * Ties go to the smaller x. When the maximum is interior, the vertex of the
 * quadratic through it and its two neighbours refines the location.
 */
inline MaxRegret find_max_regret(SweepTable const& table,
                                 std::optional<std::string_view> method = std::nullopt)
{
    auto rows = detail::select_rows(table, method);
    if (rows.size() < 3)
        throw std::domain_error("find_max_regret: need at least three rows");
    std::sort(rows.begin(), rows.end(),
              [](SweepRow const& a, SweepRow const& b) { return a.x < b.x; });

    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].mean > rows[best].mean)
            best = i;
    }

    MaxRegret result;
    result.x = rows[best].x;
    result.regret = rows[best].mean;
    result.boundary = best == 0 || best + 1 == rows.size();
    if (!result.boundary)
    {
        double x0 = rows[best - 1].x, x1 = rows[best].x, x2 = rows[best + 1].x;
        double y0 = rows[best - 1].mean, y1 = rows[best].mean, y2 = rows[best + 1].mean;
        // Lagrange form; denominator vanishes only for a straight line
        double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        double c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1
                    + x0 * x1 * (x0 - x1) * y2)
                   / denom;
        if (a < 0)
        {
            double xv = -b / (2 * a);
            result.fitted_x = xv;
            result.fitted_regret = c - b * b / (4 * a);
        }
    }
    return result;
}

/*!
 * \brief Smallest horizon from which every later row stays within
 * (1 + tol) * limit_regret.
 *
 * Returns the first N of the range when no row exceeds the bound, and
 * nothing when the last row does.
 */
inline std::optional<long>
find_threshold_horizon(SweepTable const& table,
                       double limit_regret,
                       double tol = 0.02,
                       std::optional<std::string_view> method = std::nullopt)
{
    if (table.rows.empty())
        throw std::domain_error("find_threshold_horizon: empty table");
    if (!(tol > 0))
        throw std::domain_error("find_threshold_horizon: tolerance must be positive");
    auto rows = detail::select_rows(table, method);
    if (rows.empty())
        throw std::domain_error("find_threshold_horizon: no rows for method");
    std::sort(rows.begin(), rows.end(),
              [](SweepRow const& a, SweepRow const& b) { return a.x < b.x; });

    double const bound = (1 + tol) * limit_regret;
    std::optional<long> answer;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
    {
        if (it->mean > bound)
            break;
        answer = std::lround(it->x);
    }
    return answer;
}

}  // namespace ucbsde
