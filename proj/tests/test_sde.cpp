#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ucbsde/bandit.hpp"
#include "ucbsde/random.hpp"
#include "ucbsde/sde.hpp"

using namespace ucbsde;
using Catch::Approx;

namespace {
struct FixedNoise
{
    std::vector<double> values;
    std::size_t next = 0;
    double operator()() { return next < values.size() ? values[next++] : 0.0; }
};

struct Zero
{
    double operator()() const { return 0.0; }
};

struct Recorder
{
    std::vector<std::size_t>* arms;
    void operator()(long, std::size_t arm) const { arms->push_back(arm); }
};

SdeConfig two_armed(double c2, double d1, double d2, double h)
{
    return {{{0.0, c2}, {d1, d2}, 1.0}, h};
}

// I_l = prod_{i != l} H(U_l - U_i) for l < J, and I_J = 1 - sum of the rest.
// H(0) is 0 against a later arm and 1 against an earlier one, which sends a
// tie to the highest index among the tied arms.
std::vector<int> heaviside_indicators(std::vector<double> const& u)
{
    std::size_t const j = u.size();
    std::vector<int> ind(j, 0);
    int sum = 0;
    for (std::size_t l = 0; l + 1 < j; ++l)
    {
        int prod = 1;
        for (std::size_t i = 0; i < j; ++i)
        {
            if (i == l)
                continue;
            double arg = u[l] - u[i];
            int h = arg > 0 || (arg == 0 && i < l) ? 1 : 0;
            prod *= h;
        }
        ind[l] = prod;
        sum += prod;
    }
    ind[j - 1] = 1 - sum;
    return ind;
}
}  // namespace

TEST_CASE("to_scaled", "[sde]")
{
    BanditSpec a{{{0, 1}, {0.18, 1}}, 400};
    auto s = to_scaled(a, 0, {});
    CHECK(s.drifts[0] == 0);
    CHECK(s.drifts[1] == Approx(3.6).epsilon(1e-14));
    CHECK(s.rel_variances == std::vector<double>{1, 1});

    BanditSpec b{{{5, 2}, {5, 2}}, 100};
    auto t = to_scaled(b, 5, {});
    CHECK(t.drifts == std::vector<double>{0, 0});
    CHECK(t.rel_variances == std::vector<double>{1, 1});

    BanditSpec c{{{0, 4}, {1, 1}}, 4};
    auto u = to_scaled(c, 0, {});
    CHECK(u.drifts == std::vector<double>{0, 1});
    CHECK(u.rel_variances == std::vector<double>{1, 0.25});

    BanditSpec z{{{0, 0}, {1, 0}}, 4};
    CHECK_THROWS_AS(to_scaled(z, 0, {}), std::domain_error);
}

TEST_CASE("to_scaled inverts close_means", "[sde][property]")
{
    SplitMix64 gen(8);
    for (int trial = 0; trial < 500; ++trial)
    {
        std::vector<double> c{static_cast<double>(gen() % 2001) / 100 - 10,
                              static_cast<double>(gen() % 2001) / 100 - 10,
                              static_cast<double>(gen() % 2001) / 100 - 10};
        double d = 0.1 + static_cast<double>(gen() % 100) / 10;
        long n = 3 + static_cast<long>(gen() % 5000);
        double m = static_cast<double>(gen() % 200) / 10 - 10;
        auto means = close_means(m, c, d, n);
        BanditSpec spec{{{means[0], d}, {means[1], d / 2}, {means[2], d}}, n};
        UcbConfig config;
        config.exploration = 2.5;
        auto sys = to_scaled(spec, m, config);
        for (std::size_t l = 0; l < 3; ++l)
            CHECK(sys.drifts[l] == Approx(c[l]).margin(1e-9));
        CHECK(*std::max_element(sys.rel_variances.begin(), sys.rel_variances.end()) == 1.0);
        CHECK(sys.rel_variances[1] == 0.5);
        CHECK(sys.exploration == 2.5);
    }
}

TEST_CASE("scaled_ucb_index", "[sde]")
{
    CHECK(scaled_ucb_index(0.3, 0.3, 0.3, 1, 1) == Approx(1.0).epsilon(1e-15));
    // 0.5 + sqrt(log(2.5) / 0.2), evaluated at 30 digits
    CHECK(scaled_ucb_index(0.1, 0.2, 0.5, 1, 1) == Approx(2.6404330541670242).epsilon(1e-14));
    CHECK(scaled_ucb_index(-0.4, 0.5, 1.0, 0, 1) == -0.8);
    CHECK_THROWS_AS(scaled_ucb_index(0.1, 0.6, 0.5, 1, 1), std::domain_error);
    CHECK_THROWS_AS(scaled_ucb_index(0.1, 0.0, 0.5, 1, 1), std::domain_error);
}

TEST_CASE("indicator", "[sde]")
{
    ScaledSystem sys{{0, 0}, {1, 1}, 1};
    SdeState sym{0.4, {0.2, 0.2}, {0.05, 0.05}};
    CHECK(indicator(sym, sys) == 1);

    ScaledSystem sys2{{0, 1}, {1, 1}, 1};
    SdeState s{0.5, {0.3, 0.2}, {0.3, 0.1}};
    CHECK(indicator(s, sys2) == 1);

    ScaledSystem sys3{{0, 0, 0}, {1, 1, 1}, 1};
    SdeState dom{0.6, {0.2, 0.2, 0.2}, {0.0, 0.5, 0.0}};
    CHECK(indicator(dom, sys3) == 1);
}

TEST_CASE("argmax indicator equals the product of Heaviside functions", "[sde][property]")
{
    SplitMix64 gen(21);
    NormalStream noise(22);
    for (int trial = 0; trial < 100'000; ++trial)
    {
        std::size_t j = 2 + gen() % 4;
        ScaledSystem sys;
        sys.exploration = 0.5 + static_cast<double>(gen() % 4) * 0.5;
        SdeState state;
        state.time = 0;
        bool coarse = gen() % 4 == 0;  // produce exact ties
        for (std::size_t l = 0; l < j; ++l)
        {
            sys.drifts.push_back(0);
            sys.rel_variances.push_back(coarse ? 0.0 : static_cast<double>(gen() % 101) / 100);
            double t_l = coarse ? 0.25 : 0.001 + static_cast<double>(gen() % 1000) / 1000;
            state.usage.push_back(t_l);
            state.time += t_l;
            state.rewards.push_back(coarse ? static_cast<double>(gen() % 3) * 0.25 : noise() * 0.3);
        }
        std::vector<double> u;
        for (std::size_t l = 0; l < j; ++l)
            u.push_back(scaled_ucb_index(state.rewards[l], state.usage[l], state.time,
                                         sys.rel_variances[l], sys.exploration));
        auto ind = heaviside_indicators(u);
        REQUIRE(std::accumulate(ind.begin(), ind.end(), 0) == 1);
        std::size_t chosen = indicator(state, sys);
        REQUIRE(ind[chosen] == 1);
        if (j == 2)
        {
            // two-armed rule: arm 1 iff U1 > U2
            REQUIRE(chosen == (u[0] > u[1] ? 0u : 1u));
        }
    }
}

TEST_CASE("em_init", "[sde]")
{
    Zero zero;
    auto s = em_init(two_armed(3.6, 0, 0, 1e-3), zero);
    CHECK(s.time == 0.002);
    CHECK(s.usage == std::vector<double>{0.001, 0.001});
    CHECK(s.rewards[0] == 0);
    CHECK(s.rewards[1] == 3.6 * 1e-3);

    auto s2 = em_init(two_armed(-1.25, 0.7, 1, 1e-3), zero);
    CHECK(s2.rewards == std::vector<double>{0.0, -1.25 * 1e-3});

    SdeConfig three{{{0, 1, 2}, {1, 1, 1}, 1}, 0.01};
    NormalStream noise(4);
    auto s3 = em_init(three, noise);
    CHECK(s3.time == Approx(0.03).epsilon(1e-15));
    CHECK(std::accumulate(s3.usage.begin(), s3.usage.end(), 0.0) == Approx(s3.time).epsilon(1e-15));
    CHECK(noise.draws() == 3);

    FixedNoise fixed{{2.0, -1.0}};
    auto s4 = em_init(two_armed(1, 0.25, 1, 0.04), fixed);
    CHECK(s4.rewards[0] == Approx(0 + 0.5 * 0.2 * 2.0));
    CHECK(s4.rewards[1] == Approx(0.04 - 0.2));
}

TEST_CASE("em_step", "[sde]")
{
    SdeConfig config{{{0, 1}, {1, 1}, 1}, 1e-3};
    SdeState s{0.5, {0.3, 0.2}, {0.3, 0.1}};
    Zero zero;
    auto arm = em_step(s, config, zero);
    CHECK(arm == 1);
    CHECK(s.rewards[0] == 0.3);
    CHECK(s.rewards[1] == Approx(0.101).epsilon(1e-15));
    CHECK(s.usage[0] == 0.3);
    CHECK(s.usage[1] == Approx(0.201).epsilon(1e-15));
    CHECK(s.time == Approx(0.501).epsilon(1e-15));

    SdeConfig det{{{0, 2}, {1, 0}, 1}, 1e-3};
    SdeState d{0.5, {0.3, 0.2}, {0.0, 0.6}};
    NormalStream noise(9);
    REQUIRE(em_step(d, det, noise) == 1);
    CHECK(d.rewards[1] == 0.6 + 2 * 1e-3);

    SdeState end{1.0, {0.5, 0.5}, {0, 0}};
    CHECK_THROWS_AS(em_step(end, config, zero), std::logic_error);
}

TEST_CASE("integrate degenerate cases", "[sde]")
{
    NormalStream noise(1);
    auto r = integrate(two_armed(1, 0, 0, 1e-3), noise);
    CHECK(r.final_usage[0] == Approx(0.001).epsilon(1e-12));
    CHECK(r.final_usage[1] == Approx(0.999).epsilon(1e-12));
    CHECK(r.normalized_regret == Approx(0.001).epsilon(1e-12));

    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        NormalStream n2(seed);
        CHECK(integrate(two_armed(0, 1, 0.3, 1e-3), n2).normalized_regret == 0.0);
    }
}

TEST_CASE("trajectory invariants", "[sde][property]")
{
    for (double h : {1e-3, 5e-4, 0.0123})
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed)
        {
            SdeConfig config{{{0, 3.6, 1.0}, {1, 1, 0.5}, 1}, h};
            if (seed % 2)
                config.system = {{0, 3.6}, {1, 1}, 1};
            NormalStream noise(seed_for(3, seed));
            SdeState s = em_init(config, noise);
            auto prev = s.usage;
            long steps = config.free_steps();
            for (long k = 0; k < steps; ++k)
            {
                em_step(s, config, noise);
                double sum = std::accumulate(s.usage.begin(), s.usage.end(), 0.0);
                REQUIRE(std::abs(sum - s.time) <= 1e-9);
                int advanced = 0;
                for (std::size_t l = 0; l < s.usage.size(); ++l)
                {
                    REQUIRE(s.usage[l] >= prev[l]);
                    REQUIRE(s.usage[l] >= h);
                    advanced += s.usage[l] != prev[l];
                }
                REQUIRE(advanced == 1);
                prev = s.usage;
            }
            CHECK(s.time == Approx(1.0).margin(h / 2));
            auto const j = static_cast<std::uint64_t>(config.system.num_arms());
            CHECK(noise.draws() == j + static_cast<std::uint64_t>(std::lround((1 - j * h) / h)));
        }
    }
}

TEST_CASE("integrate is reproducible from its seed", "[sde][property]")
{
    auto config = two_armed(3.6, 1, 1, 1e-3);
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        NormalStream a(seed), b(seed);
        std::vector<std::size_t> sa, sb;
        auto ra = integrate(config, a, Recorder{&sa});
        auto rb = integrate(config, b, Recorder{&sb});
        CHECK(sa == sb);
        CHECK(ra.normalized_regret == rb.normalized_regret);
    }
}

TEST_CASE("shifting every drift leaves the chosen arms unchanged", "[sde][property]")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        auto base = two_armed(3.6, 1, 1, 1e-3);
        auto shifted = base;
        for (auto& c : shifted.system.drifts)
            c += 2.0;
        NormalStream a(seed), b(seed);
        std::vector<std::size_t> sa, sb;
        auto ra = integrate(base, a, Recorder{&sa});
        auto rb = integrate(shifted, b, Recorder{&sb});
        CHECK(sa == sb);
        CHECK(ra.normalized_regret == Approx(rb.normalized_regret).margin(1e-12));
    }
}

TEST_CASE("SdeConfig validation", "[sde]")
{
    NormalStream noise(1);
    CHECK_THROWS_AS(integrate(two_armed(1, 1, 1, 0.5), noise), std::domain_error);
    CHECK_THROWS_AS(integrate(two_armed(1, 1, 1.5, 1e-3), noise), std::domain_error);
    CHECK_THROWS_AS(integrate(two_armed(1, 1, 1, -1e-3), noise), std::domain_error);
    SdeConfig mismatch{{{0, 1}, {1}, 1}, 1e-3};
    CHECK_THROWS_AS(integrate(mismatch, noise), std::domain_error);
}
