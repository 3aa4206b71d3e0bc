// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops shared by the demand calibrator, the gravity
// model, and the greedy signal surrogate. Each kernel has a scalar reference
// in `kernels::scalar` and, on x86-64, an AVX2 variant in `kernels::avx2`.
// The unqualified entry points dispatch once on the running CPU.
//
// Element-wise kernels agree exactly across variants (value equality; a clamp
// may return +0.0 where the scalar path keeps -0.0). Reductions differ only by
// summation order.

#include <span>
#include <string_view>

namespace openti::kernels
{

enum class Isa
{
    scalar,
    avx2,
};

[[nodiscard]] Isa active_isa() noexcept;
[[nodiscard]] bool isa_supported(Isa isa) noexcept;
[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;

/// Pins dispatch to `isa` (tests, benchmarks). Returns false if unsupported.
bool force_isa(Isa isa) noexcept;

double sum(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept;
void scale(std::span<double> x, double factor) noexcept;
void clamp_nonneg(std::span<double> x) noexcept;

/// genes[i] = max(0, genes[i] + max(sigma_frac * genes[i], sigma_floor) * noise[i])
void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept;

namespace scalar
{
double sum(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept;
void scale(std::span<double> x, double factor) noexcept;
void clamp_nonneg(std::span<double> x) noexcept;
void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept;
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define OPENTI_KERNELS_HAVE_AVX2 1
namespace avx2
{
double sum(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double sum_sq_diff(std::span<const double> a, std::span<const double> b) noexcept;
void scale(std::span<double> x, double factor) noexcept;
void clamp_nonneg(std::span<double> x) noexcept;
void mutate_gaussian(std::span<double> genes, std::span<const double> noise, double sigma_frac,
                     double sigma_floor) noexcept;
} // namespace avx2
#endif

} // namespace openti::kernels
