#include "spfk/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace spfk::kernels {

namespace scalar {

// Neumaier-compensated sum: exact to ~1 ulp even under heavy cancellation.
double sum(std::span<const double> v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

void scale(std::span<double> v, double factor) {
    for (double& x : v) x *= factor;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t n = a.size(), i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y) {
    Moments m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        m.sxx += dx * dx;
        m.sxy += dx * dy;
        m.syy += dy * dy;
    }
    return m;
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported() { return __builtin_cpu_supports("avx2") != 0; }
}  // namespace avx2
#endif

namespace {

struct Table {
    double (*sum)(std::span<const double>);
    void (*scale)(std::span<double>, double);
    double (*dot)(std::span<const double>, std::span<const double>);
    Moments (*centered_moments)(std::span<const double>, std::span<const double>,
                                double, double);
    const char* name;
};

constexpr Table kScalar{scalar::sum, scalar::scale, scalar::dot,
                        scalar::centered_moments, "scalar"};

Table pick() {
    const char* env = std::getenv("SPFK_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(__x86_64__) || defined(_M_X64)
    bool want_avx2 = env == nullptr || std::strcmp(env, "avx2") == 0;
    if (want_avx2 && avx2::supported())
        return Table{avx2::sum, avx2::scale, avx2::dot, avx2::centered_moments,
                     "avx2"};
#endif
#if defined(__aarch64__)
    bool want_neon = env == nullptr || std::strcmp(env, "neon") == 0;
    if (want_neon)
        return Table{neon::sum, neon::scale, neon::dot, neon::centered_moments,
                     "neon"};
#endif
    return kScalar;
}

const Table& table() {
    static const Table t = pick();
    return t;
}

}  // namespace

double sum(std::span<const double> v) { return table().sum(v); }
void scale(std::span<double> v, double factor) { table().scale(v, factor); }
double dot(std::span<const double> a, std::span<const double> b) {
    return table().dot(a, b);
}
Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y) {
    return table().centered_moments(x, y, mean_x, mean_y);
}
const char* active_variant() { return table().name; }

}  // namespace spfk::kernels
