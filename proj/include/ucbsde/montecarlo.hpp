#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bandit.hpp"
#include "random.hpp"
#include "sde.hpp"

namespace ucbsde {

//---------------------------------------------------------------------------//
// Engines and tasks
//---------------------------------------------------------------------------//

struct DiscreteEngine
{
    BanditSpec spec;
    UcbConfig config;
};

struct LimitEngine
{
    SdeConfig config;
};

using Engine = std::variant<DiscreteEngine, LimitEngine>;

//! Per-replication quantity being averaged.
enum class Metric
{
    normalized_regret,
    regret  //!< unscaled; coincides with normalized_regret for the limit engine
};

struct ReplicationTask
{
    Engine engine;
    long replications = 1;
    std::uint64_t master_seed = 0;
    Metric metric = Metric::normalized_regret;
};

struct AggregateStats
{
    double mean = 0;
    std::optional<double> std_error;  //!< absent for a single sample
    long count = 0;
};

//! Thrown when one replication fails; carries its index.
class ReplicationError : public std::runtime_error
{
  public:
    ReplicationError(long index, std::string const& what)
        : std::runtime_error("replication " + std::to_string(index) + ": " + what), index_(index)
    {
    }

    long index() const noexcept { return index_; }

  private:
    long index_;
};

//---------------------------------------------------------------------------//
// Aggregation
//---------------------------------------------------------------------------//

namespace detail {
// Neumaier compensated summation
class CompensatedSum
{
  public:
    void add(double x) noexcept
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0;
    double comp_ = 0;
};
}  // namespace detail

/*!
 * \brief Sample mean and standard error (divisor R - 1, over sqrt R).
 */
inline AggregateStats aggregate(std::span<double const> samples)
{
    if (samples.empty())
        throw std::domain_error("aggregate: no samples");

    detail::CompensatedSum sum;
    for (double x : samples)
        sum.add(x);
    double const n = static_cast<double>(samples.size());
    double const mean = sum.value() / n;

    AggregateStats stats;
    stats.mean = mean;
    stats.count = static_cast<long>(samples.size());
    if (samples.size() > 1)
    {
        detail::CompensatedSum sq;
        for (double x : samples)
            sq.add((x - mean) * (x - mean));
        stats.std_error = std::sqrt(sq.value() / (n - 1)) / std::sqrt(n);
    }
    return stats;
}

//---------------------------------------------------------------------------//
// Replications
//---------------------------------------------------------------------------//

//! Workers used when the caller does not say: UCBSDE_THREADS, else hardware.
inline unsigned default_parallelism()
{
    if (char const* env = std::getenv("UCBSDE_THREADS"))
    {
        char* end = nullptr;
        long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value >= 1)
            return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline void validate(ReplicationTask const& task)
{
    if (task.replications < 1)
        throw std::domain_error("replication count must be at least 1");
    std::visit(
        [&](auto const& engine) {
            using E = std::decay_t<decltype(engine)>;
            if constexpr (std::is_same_v<E, DiscreteEngine>)
            {
                engine.spec.validate();
                engine.config.validate();
                if (task.metric == Metric::normalized_regret && !(engine.spec.max_variance() > 0))
                    throw std::domain_error(
                        "normalized regret is undefined when all variances are zero");
            }
            else
            {
                engine.config.validate();
            }
        },
        task.engine);
}

//! The metric for replication \c index, computed on its own noise stream.
inline double run_one(ReplicationTask const& task, long index)
{
    NormalStream noise(seed_for(task.master_seed, static_cast<std::uint64_t>(index)));
    return std::visit(
        [&](auto const& engine) -> double {
            using E = std::decay_t<decltype(engine)>;
            if constexpr (std::is_same_v<E, DiscreteEngine>)
            {
                RunResult r = simulate_run(engine.spec, engine.config, noise);
                return task.metric == Metric::regret ? r.regret : require_normalized(r);
            }
            else
            {
                return integrate(engine.config, noise).normalized_regret;
            }
        },
        task.engine);
}

/*!
 * \brief Per-replication metric values, in replication order.
 *
 * Replications are split into contiguous blocks, one per worker. Each value
 * depends only on (master_seed, index), so the output is identical for any
 * parallelism.
 */
inline std::vector<double> replicate(ReplicationTask const& task, unsigned parallelism)
{
    validate(task);
    long const total = task.replications;
    std::vector<double> samples(static_cast<std::size_t>(total));

    unsigned const workers
        = static_cast<unsigned>(std::clamp<long>(parallelism, 1, total));

    std::mutex error_mutex;
    std::optional<ReplicationError> first_error;

    auto work = [&](long begin, long end) {
        for (long i = begin; i < end; ++i)
        {
            try
            {
                samples[static_cast<std::size_t>(i)] = run_one(task, i);
            }
            catch (std::exception const& e)
            {
                std::lock_guard lock(error_mutex);
                if (!first_error || first_error->index() > i)
                    first_error.emplace(i, e.what());
                return;
            }
        }
    };

    if (workers == 1)
    {
        work(0, total);
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
        {
            long begin = total * w / workers;
            long end = total * (w + 1) / workers;
            pool.emplace_back(work, begin, end);
        }
    }

    if (first_error)
        throw *first_error;
    return samples;
}

//! Mean and standard error of the task's metric over all replications.
inline AggregateStats
run_replications(ReplicationTask const& task, unsigned parallelism = default_parallelism())
{
    auto samples = replicate(task, parallelism);
    return aggregate(samples);
}

}  // namespace ucbsde
