#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ucbsde {

//---------------------------------------------------------------------------//
/*!
 * \brief SplitMix64 finalizer: a bijective 64-bit mixer with full avalanche.
 *
 * Constants from Steele, Lea & Flood, "Fast splittable pseudorandom number
 * generators" (variant 13 of Stafford's mixers).
 */
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t golden_gamma = UINT64_C(0x9E3779B97F4A7C15);

//---------------------------------------------------------------------------//
/*!
 * \brief Seed of the noise stream owned by one replication.
 *
 * Counter mode: the mixed master seed is offset by (index + 1) golden-ratio
 * increments and mixed again. Both steps are bijections of the 64-bit ring,
 * so distinct indices under one master seed never collide, and the result
 * depends on nothing but (master, index).
 */
constexpr std::uint64_t seed_for(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) + (index + 1) * golden_gamma);
}

//---------------------------------------------------------------------------//
/*!
 * \brief SplitMix64 engine; satisfies UniformRandomBitGenerator.
 */
class SplitMix64
{
  public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

  private:
    std::uint64_t state_;
};

//---------------------------------------------------------------------------//
// Inverse of the standard normal CDF.
//
// Acklam's rational approximation (relative error < 1.2e-9) followed by one
// Halley step against erfc, which brings the result to double precision.
inline double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
    {
        if (p == 0.0)
            return -std::numeric_limits<double>::infinity();
        if (p == 1.0)
            return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }

    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                            -2.759285104469687e+02, 1.383577518672690e+02,
                            -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                            -1.556989798598866e+02, 6.680131188771972e+01,
                            -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                            -2.400758277161838e+00, -2.549732539343734e+00,
                            4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                            2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low)
    {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    else if (p <= 1 - p_low)
    {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    }
    else
    {
        double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }

    // Halley refinement
    constexpr double sqrt_2pi = 2.50662827463100050242;
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * sqrt_2pi * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

//---------------------------------------------------------------------------//
/*!
 * \brief Stream of standard-normal variates.
 *
 * Exactly one 64-bit word is consumed per variate: its top 53 bits give a
 * uniform on the open interval (0, 1), mapped through normal_quantile. Draw
 * counts are therefore equal to engine-call counts.
 */
class NormalStream
{
  public:
    explicit NormalStream(std::uint64_t seed) noexcept : engine_(seed) {}

    double operator()()
    {
        ++draws_;
        constexpr double scale = 0x1.0p-53;
        double u = (static_cast<double>(engine_() >> 11) + 0.5) * scale;
        return normal_quantile(u);
    }

    //! Number of variates produced so far
    std::uint64_t draws() const noexcept { return draws_; }

  private:
    SplitMix64 engine_;
    std::uint64_t draws_ = 0;
};

}  // namespace ucbsde
