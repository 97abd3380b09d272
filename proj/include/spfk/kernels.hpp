#pragma once

#include <cstddef>
#include <span>

// Array arithmetic used by the spectrum and fitting paths. Every kernel has
// a scalar reference implementation and may have SIMD variants; the variant
// is picked once at startup from CPU capabilities (override with the
// SPFK_KERNELS environment variable: "scalar", "avx2", "neon").
//
// Variants are equivalence-tested against the scalar reference. Results are
// deterministic for a fixed variant; sums use compensated accumulation so
// variants agree to a few ulp even on million-entry spectra.

namespace spfk::kernels {

struct Moments {
    double sxx = 0.0;  // sum (x - mean_x)^2
    double sxy = 0.0;  // sum (x - mean_x)(y - mean_y)
    double syy = 0.0;  // sum (y - mean_y)^2
};

// Compensated (Kahan) sum of v.
double sum(std::span<const double> v);

// v[i] *= factor
void scale(std::span<double> v, double factor);

// Plain dot product, blocked accumulation.
double dot(std::span<const double> a, std::span<const double> b);

// Second-order moments about the given means; x and y must be equal length.
Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y);

// Name of the variant in use ("scalar", "avx2", "neon").
const char* active_variant();

namespace scalar {
double sum(std::span<const double> v);
void scale(std::span<double> v, double factor);
double dot(std::span<const double> a, std::span<const double> b);
Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported();  // CPU check; the functions below require it
double sum(std::span<const double> v);
void scale(std::span<double> v, double factor);
double dot(std::span<const double> a, std::span<const double> b);
Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double sum(std::span<const double> v);
void scale(std::span<double> v, double factor);
double dot(std::span<const double> a, std::span<const double> b);
Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y);
}  // namespace neon
#endif

}  // namespace spfk::kernels
