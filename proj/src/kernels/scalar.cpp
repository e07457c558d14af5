#include <cmath>

#include "rankprobe/kernels/kernels.hpp"

namespace rankprobe::kernels::scalar {

namespace {

inline double residual2(double v) {
  const double r = v - std::nearbyint(v);
  return r * r;
}

}  // namespace

double lattice_dist2(const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += residual2(y[i]);
  return acc;
}

double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * residual2(x[i] * s[i]);
  return acc;
}

std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2) {
  std::size_t hits = 0;
  for (std::size_t p = 0; p < count; ++p) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = coords[c * count + p] - center[c];
      d2 += d * d;
    }
    if (d2 <= radius2) ++hits;
  }
  return hits;
}

}  // namespace rankprobe::kernels::scalar
