#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucbsde {

//! Anything that yields standard-normal draws on call
template <class T>
concept NoiseSource = requires(T& t) {
    { t() } -> std::convertible_to<double>;
};

//---------------------------------------------------------------------------//
// Domain types
//---------------------------------------------------------------------------//

struct ArmParams
{
    double mean = 0;
    double variance = 1;
};

/*!
 * \brief Gaussian bandit instance: arm parameters and a known horizon.
 */
struct BanditSpec
{
    std::vector<ArmParams> arms;
    long horizon = 0;

    std::size_t num_arms() const noexcept { return arms.size(); }

    double max_variance() const noexcept
    {
        double d = 0;
        for (auto const& arm : arms)
            d = std::max(d, arm.variance);
        return d;
    }

    double max_mean() const
    {
        double m = arms.front().mean;
        for (auto const& arm : arms)
            m = std::max(m, arm.mean);
        return m;
    }

    //! Throws std::domain_error when the instance is unusable.
    void validate() const
    {
        if (arms.size() < 2)
            throw std::domain_error("bandit needs at least two arms");
        for (auto const& arm : arms)
        {
            if (!(arm.variance >= 0) || !std::isfinite(arm.variance))
                throw std::domain_error("arm variance must be finite and >= 0");
            if (!std::isfinite(arm.mean))
                throw std::domain_error("arm mean must be finite");
        }
        if (horizon < static_cast<long>(arms.size()))
            throw std::domain_error("horizon " + std::to_string(horizon)
                                    + " is shorter than the " + std::to_string(arms.size())
                                    + " forced initial pulls");
    }
};

//! Which per-replication quantity estimates the regret.
enum class RegretEstimator
{
    pseudo,   //!< sum of (m_max - m_chosen)
    realized  //!< N * m_max - sum of observed rewards
};

struct UcbConfig
{
    double exploration = 1.0;
    RegretEstimator estimator = RegretEstimator::pseudo;

    void validate() const
    {
        if (!(exploration > 0) || !std::isfinite(exploration))
            throw std::domain_error("exploration coefficient must be positive");
    }
};

struct RunState
{
    long step = 0;  //!< completed steps
    std::vector<long> counts;
    std::vector<double> reward_sums;

    explicit RunState(std::size_t num_arms) : counts(num_arms, 0), reward_sums(num_arms, 0.0)
    {
    }
};

struct RunResult
{
    std::vector<long> counts;
    double regret = 0;  //!< pseudo or realized, per UcbConfig::estimator
    double pseudo_regret = 0;
    //! regret / sqrt(D N); absent when every arm is deterministic
    std::optional<double> normalized_regret;
};

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

/*!
 * \brief Means of "close" arms: m + c_l sqrt(D / N).
 */
inline std::vector<double>
close_means(double baseline, std::span<double const> offsets, double variance, long horizon)
{
    if (!(variance > 0))
        throw std::domain_error("close_means: variance must be positive");
    if (horizon < 1)
        throw std::domain_error("close_means: horizon must be positive");
    double scale = std::sqrt(variance / static_cast<double>(horizon));
    std::vector<double> result;
    result.reserve(offsets.size());
    for (double c : offsets)
        result.push_back(baseline + c * scale);
    return result;
}

//! Exploration bonus sqrt(a D_l log(n / n_l) / n_l); requires 1 <= n_l <= n.
inline double ucb_bonus(long n_l, long n, double variance, double exploration)
{
    if (n_l < 1)
        throw std::logic_error("ucb_index: arm has not been pulled yet");
    if (n < n_l)
        throw std::domain_error("ucb_index: step is smaller than the arm count");
    double ratio = static_cast<double>(n) / static_cast<double>(n_l);
    return std::sqrt(exploration * variance * std::log(ratio) / static_cast<double>(n_l));
}

/*!
 * \brief Upper confidence bound X_l / n_l + sqrt(a D_l log(n / n_l) / n_l).
 */
inline double
ucb_index(double reward_sum, long n_l, long n, double variance, double exploration)
{
    double bonus = ucb_bonus(n_l, n, variance, exploration);
    return reward_sum / static_cast<double>(n_l) + bonus;
}

//! Index of the maximal element; ties go to the highest index.
inline std::size_t argmax_last(std::span<double const> values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
    {
        if (values[i] >= values[best])
            best = i;
    }
    return best;
}

/*!
 * \brief Arm pulled at step state.step + 1 (0-based arm index).
 *
 * The step being decided enters log(n / n_l), with counts taken after the
 * previous step.
 */
inline std::size_t
choose_arm(RunState const& state, BanditSpec const& spec, UcbConfig const& config)
{
    std::size_t const num_arms = spec.num_arms();
    long const n = state.step + 1;
    if (n <= static_cast<long>(num_arms))
        throw std::logic_error("choose_arm: step " + std::to_string(n)
                               + " is a forced initial pull");

    std::size_t best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < num_arms; ++l)
    {
        double u = ucb_index(state.reward_sums[l], state.counts[l], n,
                             spec.arms[l].variance, config.exploration);
        if (u >= best_index)
        {
            best_index = u;
            best = l;
        }
    }
    return best;
}

//! One reward: m_l + sqrt(D_l) eta.
inline double sample_reward(ArmParams const& arm, double eta) noexcept
{
    if (arm.variance == 0)
        return arm.mean;
    return arm.mean + std::sqrt(arm.variance) * eta;
}

//! Observer that ignores every pull
struct NoTrace
{
    void operator()(long, std::size_t) const noexcept {}
};

/*!
 * \brief Play one full horizon of the UCB strategy.
 *
 * Steps 1..J pull each arm once in order; afterwards choose_arm decides.
 * One noise draw is consumed per step. The optional \c trace observer is
 * called as trace(step, arm) for every pull.
 */
template <NoiseSource Noise, class Trace = NoTrace>
RunResult simulate_run(BanditSpec const& spec,
                       UcbConfig const& config,
                       Noise&& noise,
                       Trace&& trace = {})
{
    spec.validate();
    config.validate();

    std::size_t const num_arms = spec.num_arms();
    long const horizon = spec.horizon;

    RunState state(num_arms);
    double observed_total = 0;

    auto pull = [&](std::size_t arm) {
        double reward = sample_reward(spec.arms[arm], static_cast<double>(noise()));
        state.reward_sums[arm] += reward;
        state.counts[arm] += 1;
        state.step += 1;
        observed_total += reward;
        trace(state.step, arm);
    };

    for (std::size_t l = 0; l < num_arms; ++l)
        pull(l);
    while (state.step < horizon)
        pull(choose_arm(state, spec, config));

    RunResult result;
    double const m_max = spec.max_mean();
    for (std::size_t l = 0; l < num_arms; ++l)
        result.pseudo_regret += (m_max - spec.arms[l].mean) * static_cast<double>(state.counts[l]);

    result.regret = config.estimator == RegretEstimator::pseudo
                        ? result.pseudo_regret
                        : static_cast<double>(horizon) * m_max - observed_total;

    double const d = spec.max_variance();
    if (d > 0)
        result.normalized_regret = result.regret / std::sqrt(d * static_cast<double>(horizon));
    result.counts = std::move(state.counts);
    return result;
}

//! Normalized regret of a run; domain error when every arm is deterministic.
inline double require_normalized(RunResult const& result)
{
    if (!result.normalized_regret)
        throw std::domain_error("normalized regret is undefined when all variances are zero");
    return *result.normalized_regret;
}

}  // namespace ucbsde
