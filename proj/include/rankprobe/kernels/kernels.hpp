#pragma once

// Data-parallel inner loops shared by the arithmetic and Monte Carlo code.
//
// Every kernel has a scalar reference implementation. SIMD variants (AVX2 on
// x86-64, NEON on aarch64) are compiled when the toolchain allows and picked
// at first use if the running CPU supports them. Set RANKPROBE_KERNELS=scalar
// in the environment, or call force_backend(), to pin the reference path.
//
// Rounding to the nearest integer is ties-to-even in every backend, so
// per-element results are bit-identical; reductions may differ in the last
// few ulps because SIMD variants sum in lane order.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rankprobe::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend backend) noexcept;

/// True if the variant was compiled in and the CPU can execute it.
bool backend_available(Backend backend) noexcept;

/// Backend used by the dispatching entry points below.
Backend active_backend() noexcept;

/// Pins a backend (nullopt restores automatic selection). Throws
/// std::invalid_argument for an unavailable backend.
void force_backend(std::optional<Backend> backend);

/// Function table for one backend; all pointers are non-null.
struct KernelTable {
  Backend backend;
  // sum_i dist^2(y_i, Z)
  double (*lattice_dist2)(const double* y, std::size_t n);
  // sum_i w_i dist^2(x_i * s_i, Z)
  double (*weighted_scaled_lattice_dist2)(const double* x, const double* s, const double* w,
                                          std::size_t n);
  // number of points p with sum_c (coords[c*count + p] - center[c])^2 <= radius2
  std::size_t (*ball_count)(const double* coords, std::size_t count, std::size_t dim,
                            const double* center, double radius2);
};

const KernelTable& table(Backend backend);

// Dispatching entry points.

double lattice_dist2(std::span<const double> y);

double weighted_scaled_lattice_dist2(std::span<const double> x, std::span<const double> scale,
                                     std::span<const double> weight);

/// Points are stored coordinate-major: coords[c * count + p] is coordinate c
/// of point p.
std::size_t ball_count(std::span<const double> coords, std::size_t count, std::size_t dim,
                       std::span<const double> center, double radius2);

namespace scalar {
double lattice_dist2(const double* y, std::size_t n);
double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n);
std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2);
}  // namespace scalar

#if defined(RANKPROBE_HAVE_AVX2)
namespace avx2 {
double lattice_dist2(const double* y, std::size_t n);
double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n);
std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2);
}  // namespace avx2
#endif

#if defined(RANKPROBE_HAVE_NEON)
namespace neon {
double lattice_dist2(const double* y, std::size_t n);
double weighted_scaled_lattice_dist2(const double* x, const double* s, const double* w, std::size_t n);
std::size_t ball_count(const double* coords, std::size_t count, std::size_t dim, const double* center,
                       double radius2);
}  // namespace neon
#endif

}  // namespace rankprobe::kernels
