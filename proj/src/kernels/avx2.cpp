// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 only (no -mfma) so element-wise results match the
// scalar reference (up to the sign of zero). Tails delegate to the scalar
// kernels.
#include <openti/kernels/kernels.hpp>

#include <immintrin.h>

namespace openti::kernels::avx2
{

namespace
{

inline double hsum(__m256d v) noexcept
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, sh));
}

constexpr std::size_t kLanes = 4;

} // namespace

double sum(std::span<const double> x) noexcept
{
    const std::size_t n = x.size();
    const std::size_t body = n - n % (2 * kLanes);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 2 * kLanes)
    {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x.data() + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x.data() + i + kLanes));
    }
    return hsum(_mm256_add_pd(acc0, acc1)) + scalar::sum(x.subspan(body));
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    const std::size_t n = a.size();
    const std::size_t body = n - n % kLanes;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kLanes)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
    return hsum(acc) + scalar::dot(a.subspan(body), b.subspan(body));
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept
{
    const std::size_t n = a.size();
    const std::size_t body = n - n % kLanes;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kLanes)
    {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    return hsum(acc) + scalar::sum_sq_diff(a.subspan(body), b.subspan(body));
}

void scale(std::span<double> x, double factor) noexcept
{
    const std::size_t n = x.size();
    const std::size_t body = n - n % kLanes;
    const __m256d f = _mm256_set1_pd(factor);
    for (std::size_t i = 0; i < body; i += kLanes)
        _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), f));
    scalar::scale(x.subspan(body), factor);
}

void clamp_nonneg(std::span<double> x) noexcept
{
    const std::size_t n = x.size();
    const std::size_t body = n - n % kLanes;
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kLanes)
        _mm256_storeu_pd(x.data() + i, _mm256_max_pd(_mm256_loadu_pd(x.data() + i), zero));
    scalar::clamp_nonneg(x.subspan(body));
}

void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept
{
    const std::size_t n = genes.size();
    const std::size_t body = n - n % kLanes;
    const __m256d frac = _mm256_set1_pd(sigma_frac);
    const __m256d floor = _mm256_set1_pd(sigma_floor);
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kLanes)
    {
        const __m256d g = _mm256_loadu_pd(genes.data() + i);
        const __m256d sigma = _mm256_max_pd(_mm256_mul_pd(frac, g), floor);
        const __m256d step = _mm256_mul_pd(sigma, _mm256_loadu_pd(noise.data() + i));
        _mm256_storeu_pd(genes.data() + i, _mm256_max_pd(_mm256_add_pd(g, step), zero));
    }
    scalar::mutate_gaussian(genes.subspan(body), noise.subspan(body), sigma_frac, sigma_floor);
}

} // namespace openti::kernels::avx2
