// SPDX-License-Identifier: Apache-2.0
#include <openti/kernels/kernels.hpp>

#include <atomic>

namespace openti::kernels
{

namespace
{

struct Table
{
    double (*sum)(std::span<const double>) noexcept;
    double (*dot)(std::span<const double>, std::span<const double>) noexcept;
    double (*sum_sq_diff)(std::span<const double>, std::span<const double>) noexcept;
    void (*scale)(std::span<double>, double) noexcept;
    void (*clamp_nonneg)(std::span<double>) noexcept;
    void (*mutate_gaussian)(std::span<double>, std::span<const double>, double, double) noexcept;
};

constexpr Table kScalar {&scalar::sum,   &scalar::dot,          &scalar::sum_sq_diff,
                         &scalar::scale, &scalar::clamp_nonneg, &scalar::mutate_gaussian};

#ifdef OPENTI_KERNELS_HAVE_AVX2
constexpr Table kAvx2 {&avx2::sum,   &avx2::dot,          &avx2::sum_sq_diff,
                       &avx2::scale, &avx2::clamp_nonneg, &avx2::mutate_gaussian};
#endif

bool cpu_has_avx2() noexcept
{
#ifdef OPENTI_KERNELS_HAVE_AVX2
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() noexcept
{
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current()
{
    static std::atomic<Isa> isa {detect()};
    return isa;
}

const Table& table() noexcept
{
#ifdef OPENTI_KERNELS_HAVE_AVX2
    if (current().load(std::memory_order_relaxed) == Isa::avx2)
        return kAvx2;
#endif
    return kScalar;
}

} // namespace

Isa active_isa() noexcept
{
    return current().load();
}

bool isa_supported(Isa isa) noexcept
{
    return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

std::string_view isa_name(Isa isa) noexcept
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool force_isa(Isa isa) noexcept
{
    if (!isa_supported(isa))
        return false;
    current().store(isa);
    return true;
}

double sum(std::span<const double> x) noexcept { return table().sum(x); }
double dot(std::span<const double> a, std::span<const double> b) noexcept { return table().dot(a, b); }
double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept
{
    return table().sum_sq_diff(a, b);
}
void scale(std::span<double> x, double factor) noexcept { table().scale(x, factor); }
void clamp_nonneg(std::span<double> x) noexcept { table().clamp_nonneg(x); }
void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept
{
    table().mutate_gaussian(genes, noise, sigma_frac, sigma_floor);
}

} // namespace openti::kernels
