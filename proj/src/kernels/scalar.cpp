// SPDX-License-Identifier: Apache-2.0
#include <openti/kernels/kernels.hpp>

#include <algorithm>
#include <cassert>

namespace openti::kernels::scalar
{

double sum(std::span<const double> x) noexcept
{
    double acc = 0.0;
    for (double v: x)
        acc += v;
    return acc;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept
{
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void scale(std::span<double> x, double factor) noexcept
{
    for (double& v: x)
        v *= factor;
}

void clamp_nonneg(std::span<double> x) noexcept
{
    for (double& v: x)
        v = std::max(v, 0.0);
}

void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept
{
    assert(genes.size() == noise.size());
    for (std::size_t i = 0; i < genes.size(); ++i)
    {
        const double sigma = std::max(sigma_frac * genes[i], sigma_floor);
        const double step = sigma * noise[i];
        genes[i] = std::max(genes[i] + step, 0.0);
    }
}

} // namespace openti::kernels::scalar
