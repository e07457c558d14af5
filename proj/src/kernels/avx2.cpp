#include <immintrin.h>

#include <bit>
#include <cmath>

#include "rankprobe/kernels/kernels.hpp"

namespace rankprobe::kernels::avx2 {

namespace {

constexpr int kNearest = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline double residual2(double v) {
  const double r = v - std::nearbyint(v);
  return r * r;
}

}  // namespace

double lattice_dist2(const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(y + i);
    const __m256d b = _mm256_loadu_pd(y + i + 4);
    const __m256d ra = _mm256_sub_pd(a, _mm256_round_pd(a, kNearest));
    const __m256d rb = _mm256_sub_pd(b, _mm256_round_pd(b, kNearest));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(ra, ra));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(rb, rb));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(y + i);
    const __m256d ra = _mm256_sub_pd(a, _mm256_round_pd(a, kNearest));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(ra, ra));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += residual2(y[i]);
  return acc;
}

double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(s + i));
    const __m256d r = _mm256_sub_pd(v, _mm256_round_pd(v, kNearest));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(r, r)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += w[i] * residual2(x[i] * s[i]);
  return total;
}

std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2) {
  const __m256d r2 = _mm256_set1_pd(radius2);
  std::size_t hits = 0;
  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    __m256d d2 = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; ++c) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(coords + c * count + p), _mm256_set1_pd(center[c]));
      d2 = _mm256_add_pd(d2, _mm256_mul_pd(d, d));
    }
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ));
    hits += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
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

}  // namespace rankprobe::kernels::avx2
