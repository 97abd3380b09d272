// NEON kernel variants (aarch64 only; f64x2 lanes).

#include "spfk/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace spfk::kernels::neon {

double sum(std::span<const double> v) {
    const double* p = v.data();
    std::size_t n = v.size(), i = 0;
    float64x2_t s = vdupq_n_f64(0.0);
    float64x2_t c = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) {
        float64x2_t x = vld1q_f64(p + i);
        float64x2_t t = vaddq_f64(s, x);
        uint64x2_t s_big = vcgeq_f64(vabsq_f64(s), vabsq_f64(x));
        float64x2_t big = vbslq_f64(s_big, s, x);
        float64x2_t small = vbslq_f64(s_big, x, s);
        c = vaddq_f64(c, vaddq_f64(vsubq_f64(big, t), small));
        s = t;
    }
    double parts[5] = {vgetq_lane_f64(s, 0), vgetq_lane_f64(s, 1),
                       vgetq_lane_f64(c, 0), vgetq_lane_f64(c, 1),
                       i < n ? p[i] : 0.0};
    double acc = 0.0, comp = 0.0;
    for (double x : parts) {
        double t = acc + x;
        if (std::fabs(acc) >= std::fabs(x))
            comp += (acc - t) + x;
        else
            comp += (x - t) + acc;
        acc = t;
    }
    return acc + comp;
}

void scale(std::span<double> v, double factor) {
    double* p = v.data();
    std::size_t n = v.size(), i = 0;
    float64x2_t f = vdupq_n_f64(factor);
    for (; i + 2 <= n; i += 2) vst1q_f64(p + i, vmulq_f64(vld1q_f64(p + i), f));
    for (; i < n; ++i) p[i] *= factor;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    std::size_t n = a.size(), i = 0;
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(pa + i), vld1q_f64(pb + i)));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += pa[i] * pb[i];
    return s;
}

Moments centered_moments(std::span<const double> x, std::span<const double> y,
                         double mean_x, double mean_y) {
    const double* px = x.data();
    const double* py = y.data();
    std::size_t n = x.size(), i = 0;
    float64x2_t mx = vdupq_n_f64(mean_x);
    float64x2_t my = vdupq_n_f64(mean_y);
    float64x2_t sxx = vdupq_n_f64(0.0);
    float64x2_t sxy = vdupq_n_f64(0.0);
    float64x2_t syy = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) {
        float64x2_t dx = vsubq_f64(vld1q_f64(px + i), mx);
        float64x2_t dy = vsubq_f64(vld1q_f64(py + i), my);
        sxx = vaddq_f64(sxx, vmulq_f64(dx, dx));
        sxy = vaddq_f64(sxy, vmulq_f64(dx, dy));
        syy = vaddq_f64(syy, vmulq_f64(dy, dy));
    }
    Moments m;
    m.sxx = vgetq_lane_f64(sxx, 0) + vgetq_lane_f64(sxx, 1);
    m.sxy = vgetq_lane_f64(sxy, 0) + vgetq_lane_f64(sxy, 1);
    m.syy = vgetq_lane_f64(syy, 0) + vgetq_lane_f64(syy, 1);
    for (; i < n; ++i) {
        double dx = px[i] - mean_x;
        double dy = py[i] - mean_y;
        m.sxx += dx * dx;
        m.sxy += dx * dy;
        m.syy += dy * dy;
    }
    return m;
}

}  // namespace spfk::kernels::neon

#endif  // __aarch64__
