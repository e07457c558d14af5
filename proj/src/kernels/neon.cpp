#include <arm_neon.h>

#include <cmath>

#include "rankprobe/kernels/kernels.hpp"

namespace rankprobe::kernels::neon {

namespace {

inline double residual2(double v) {
  const double r = v - std::nearbyint(v);
  return r * r;
}

}  // namespace

double lattice_dist2(const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(y + i);
    const float64x2_t r = vsubq_f64(v, vrndnq_f64(v));
    acc = vaddq_f64(acc, vmulq_f64(r, r));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += residual2(y[i]);
  return total;
}

double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vmulq_f64(vld1q_f64(x + i), vld1q_f64(s + i));
    const float64x2_t r = vsubq_f64(v, vrndnq_f64(v));
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(w + i), vmulq_f64(r, r)));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += w[i] * residual2(x[i] * s[i]);
  return total;
}

std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2) {
  const float64x2_t r2 = vdupq_n_f64(radius2);
  std::size_t hits = 0;
  std::size_t p = 0;
  for (; p + 2 <= count; p += 2) {
    float64x2_t d2 = vdupq_n_f64(0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const float64x2_t d = vsubq_f64(vld1q_f64(coords + c * count + p), vdupq_n_f64(center[c]));
      d2 = vaddq_f64(d2, vmulq_f64(d, d));
    }
    const uint64x2_t le = vcleq_f64(d2, r2);
    hits += (vgetq_lane_u64(le, 0) ? 1 : 0) + (vgetq_lane_u64(le, 1) ? 1 : 0);
  }
  for (; p < count; ++p) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = coords[c * count + p] - center[c];
      d2 += d * d;
    }
    if (d2 <= radius2) ++hits;
  }
  return hits;
}

}  // namespace rankprobe::kernels::neon
