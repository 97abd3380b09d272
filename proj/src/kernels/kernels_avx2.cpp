// AVX2 kernel variants. This translation unit is compiled with -mavx2 and
// must only be entered after avx2::supported() returned true.

#include "spfk/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace spfk::kernels::avx2 {

namespace {

// Scalar Neumaier pass used to fold lane partials and tails.
inline double neumaier_merge(const double* parts, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = parts[i];
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

inline double reduce4(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d pair = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double sum(std::span<const double> v) {
    const double* p = v.data();
    std::size_t n = v.size(), i = 0;
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(p + i);
        __m256d t = _mm256_add_pd(s, x);
        __m256d abs_s = _mm256_andnot_pd(sign, s);
        __m256d abs_x = _mm256_andnot_pd(sign, x);
        __m256d s_big = _mm256_cmp_pd(abs_s, abs_x, _CMP_GE_OQ);
        __m256d big = _mm256_blendv_pd(x, s, s_big);
        __m256d small = _mm256_blendv_pd(s, x, s_big);
        c = _mm256_add_pd(c, _mm256_add_pd(_mm256_sub_pd(big, t), small));
        s = t;
    }
    alignas(32) double parts[11];
    _mm256_store_pd(parts, s);
    _mm256_store_pd(parts + 4, c);
    std::size_t count = 8;
    for (; i < n; ++i) parts[count++] = p[i];
    return neumaier_merge(parts, count);
}

void scale(std::span<double> v, double factor) {
    double* p = v.data();
    std::size_t n = v.size(), i = 0;
    __m256d f = _mm256_set1_pd(factor);
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(p + i, _mm256_mul_pd(_mm256_loadu_pd(p + i), f));
    for (; i < n; ++i) p[i] *= factor;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    std::size_t n = a.size(), i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
        acc = _mm256_add_pd(acc, prod);
    }
    double s = reduce4(acc);
    for (; i < n; ++i) s += pa[i] * pb[i];
    return s;
}

Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y) {
    const double* px = x.data();
    const double* py = y.data();
    std::size_t n = x.size(), i = 0;
    __m256d mx = _mm256_set1_pd(mean_x);
    __m256d my = _mm256_set1_pd(mean_y);
    __m256d sxx = _mm256_setzero_pd();
    __m256d sxy = _mm256_setzero_pd();
    __m256d syy = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), mx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), my);
        sxx = _mm256_add_pd(sxx, _mm256_mul_pd(dx, dx));
        sxy = _mm256_add_pd(sxy, _mm256_mul_pd(dx, dy));
        syy = _mm256_add_pd(syy, _mm256_mul_pd(dy, dy));
    }
    Moments m;
    m.sxx = reduce4(sxx);
    m.sxy = reduce4(sxy);
    m.syy = reduce4(syy);
    for (; i < n; ++i) {
        double dx = px[i] - mean_x;
        double dy = py[i] - mean_y;
        m.sxx += dx * dx;
        m.sxy += dx * dy;
        m.syy += dy * dy;
    }
    return m;
}

}  // namespace spfk::kernels::avx2

#endif  // __AVX2__
