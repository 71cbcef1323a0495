#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bandit.hpp"

namespace ucbsde {

/*!
 * \brief The limiting UCB system on the unit horizon.
 *
 * Arm l has drift c_l and relative variance d_l = D_l / D. The scaled
 * cumulative reward obeys dY_l = I_l c_l dt + sqrt(d_l) I_l dW_l and the
 * usage time dt_l = I_l dt, where I_l marks the arm with the largest
 * scaled index.
 */
struct ScaledSystem
{
    std::vector<double> drifts;
    std::vector<double> rel_variances;
    double exploration = 1.0;

    std::size_t num_arms() const noexcept { return drifts.size(); }

    void validate() const
    {
        if (drifts.size() != rel_variances.size())
            throw std::domain_error("drift and variance lists differ in length");
        if (drifts.size() < 2)
            throw std::domain_error("limit system needs at least two arms");
        for (double d : rel_variances)
        {
            if (!(d >= 0 && d <= 1))
                throw std::domain_error("relative variances must lie in [0, 1]");
        }
        for (double c : drifts)
        {
            if (!std::isfinite(c))
                throw std::domain_error("drifts must be finite");
        }
        if (!(exploration > 0) || !std::isfinite(exploration))
            throw std::domain_error("exploration coefficient must be positive");
    }
};

struct SdeConfig
{
    ScaledSystem system;
    double step = 1e-3;

    double start_time() const noexcept
    {
        return static_cast<double>(system.num_arms()) * step;
    }

    //! Euler steps after the one-cell-per-arm start
    long free_steps() const noexcept
    {
        return std::lround((1.0 - start_time()) / step);
    }

    void validate() const
    {
        system.validate();
        if (!(step > 0) || !(start_time() < 1))
            throw std::domain_error("step must be positive with J * step < 1");
    }
};

struct SdeState
{
    double time = 0;
    std::vector<double> usage;    //!< t_l
    std::vector<double> rewards;  //!< Y_l
};

struct SdeRunResult
{
    std::vector<double> final_usage;
    double normalized_regret = 0;
};

//---------------------------------------------------------------------------//

/*!
 * \brief Invert the close-arm parametrization of a bandit instance.
 *
 * c_l = (m_l - m) sqrt(N / D), d_l = D_l / D with D the largest variance.
 */
inline ScaledSystem
to_scaled(BanditSpec const& spec, double baseline, UcbConfig const& config)
{
    double const d_max = spec.max_variance();
    if (!(d_max > 0))
        throw std::domain_error("to_scaled: at least one arm needs positive variance");
    double const scale = std::sqrt(static_cast<double>(spec.horizon) / d_max);

    ScaledSystem system;
    system.exploration = config.exploration;
    for (auto const& arm : spec.arms)
    {
        system.drifts.push_back((arm.mean - baseline) * scale);
        system.rel_variances.push_back(arm.variance / d_max);
    }
    return system;
}

//! Y_l / t_l + sqrt(a d_l log(t / t_l) / t_l)
inline double
scaled_ucb_index(double reward, double usage, double time, double rel_variance, double exploration)
{
    if (!(usage > 0))
        throw std::domain_error("scaled_ucb_index: usage time must be positive");
    if (time < usage)
        throw std::domain_error("scaled_ucb_index: time precedes usage time");
    return reward / usage + std::sqrt(exploration * rel_variance * std::log(time / usage) / usage);
}

/*!
 * \brief The arm whose usage time advances: argmax of the scaled index,
 * ties to the highest index (Heaviside with H(0) = 0).
 */
inline std::size_t indicator(SdeState const& state, ScaledSystem const& system)
{
    std::size_t best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < system.num_arms(); ++l)
    {
        double u = scaled_ucb_index(state.rewards[l], state.usage[l], state.time,
                                    system.rel_variances[l], system.exploration);
        if (u >= best_index)
        {
            best_index = u;
            best = l;
        }
    }
    return best;
}

//! One Euler cell per arm: t = J h, t_l = h, Y_l ~ Normal(c_l h, d_l h).
template <NoiseSource Noise>
SdeState em_init(SdeConfig const& config, Noise&& noise)
{
    auto const& sys = config.system;
    double const h = config.step;
    double const sqrt_h = std::sqrt(h);

    SdeState state;
    state.time = config.start_time();
    state.usage.assign(sys.num_arms(), h);
    state.rewards.resize(sys.num_arms());
    for (std::size_t l = 0; l < sys.num_arms(); ++l)
    {
        double eta = static_cast<double>(noise());
        state.rewards[l] = sys.drifts[l] * h + std::sqrt(sys.rel_variances[l]) * sqrt_h * eta;
    }
    return state;
}

/*!
 * \brief Advance one Euler–Maruyama step with the indicator frozen over it.
 *
 * Returns the arm that advanced. Exactly one noise draw is consumed.
 */
template <NoiseSource Noise>
std::size_t em_step(SdeState& state, SdeConfig const& config, Noise&& noise)
{
    double const h = config.step;
    if (state.time + h > 1 + h / 2)
        throw std::logic_error("em_step: stepping past the end of the unit horizon");

    auto const& sys = config.system;
    std::size_t const arm = indicator(state, sys);
    double eta = static_cast<double>(noise());
    state.rewards[arm] += sys.drifts[arm] * h + std::sqrt(sys.rel_variances[arm] * h) * eta;
    state.usage[arm] += h;
    state.time += h;
    return arm;
}

//! Normalized regret of a terminal state: sum of (c_max - c_l) t_l.
inline double limit_regret(ScaledSystem const& system, std::vector<double> const& usage)
{
    double c_max = *std::max_element(system.drifts.begin(), system.drifts.end());
    double total = 0;
    for (std::size_t l = 0; l < usage.size(); ++l)
        total += (c_max - system.drifts[l]) * usage[l];
    return total;
}

//! Integrate one trajectory from em_init to t = 1.
template <NoiseSource Noise, class Trace = NoTrace>
SdeRunResult integrate(SdeConfig const& config, Noise&& noise, Trace&& trace = {})
{
    config.validate();
    SdeState state = em_init(config, noise);
    long const steps = config.free_steps();
    for (long k = 0; k < steps; ++k)
        trace(k + 1, em_step(state, config, noise));

    SdeRunResult result;
    result.normalized_regret = limit_regret(config.system, state.usage);
    result.final_usage = std::move(state.usage);
    return result;
}

}  // namespace ucbsde
