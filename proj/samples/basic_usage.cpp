// Compare the discrete UCB rule with its SDE limit at the regret maximum.

#include <cstdio>

#include "ucbsde/ucbsde.hpp"

int main()
{
    using namespace ucbsde;

    long const horizon = 400;
    double const offsets[] = {0.0, 3.6};
    auto means = close_means(0.0, offsets, 1.0, horizon);

    DiscreteEngine discrete;
    discrete.spec.arms = {{means[0], 1.0}, {means[1], 1.0}};
    discrete.spec.horizon = horizon;

    LimitEngine limit;
    limit.config.system = to_scaled(discrete.spec, 0.0, discrete.config);
    limit.config.step = 1e-3;

    auto d = run_replications({discrete, 2000, 7});
    auto s = run_replications({limit, 2000, 7});
    std::printf("discrete N=%ld: %.4f +- %.4f\n", horizon, d.mean, *d.std_error);
    std::printf("limit h=1e-3:    %.4f +- %.4f\n", s.mean, *s.std_error);
}
