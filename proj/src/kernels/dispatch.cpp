#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "rankprobe/kernels/kernels.hpp"

namespace rankprobe::kernels {

namespace {

constexpr KernelTable kScalar{Backend::scalar, &scalar::lattice_dist2, &scalar::weighted_scaled_lattice_dist2,
                              &scalar::ball_count};
#if defined(RANKPROBE_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::avx2, &avx2::lattice_dist2, &avx2::weighted_scaled_lattice_dist2,
                            &avx2::ball_count};
#endif
#if defined(RANKPROBE_HAVE_NEON)
constexpr KernelTable kNeon{Backend::neon, &neon::lattice_dist2, &neon::weighted_scaled_lattice_dist2,
                            &neon::ball_count};
#endif

const KernelTable* automatic() {
  if (const char* env = std::getenv("RANKPROBE_KERNELS"); env != nullptr && std::string(env) == "scalar") {
    return &kScalar;
  }
#if defined(RANKPROBE_HAVE_AVX2)
  if (backend_available(Backend::avx2)) return &kAvx2;
#endif
#if defined(RANKPROBE_HAVE_NEON)
  return &kNeon;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* chosen = automatic();
    if (g_active.compare_exchange_strong(t, chosen, std::memory_order_acq_rel)) t = chosen;
  }
  return *t;
}

}  // namespace

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(RANKPROBE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(RANKPROBE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  }
  switch (backend) {
#if defined(RANKPROBE_HAVE_AVX2)
    case Backend::avx2:
      return kAvx2;
#endif
#if defined(RANKPROBE_HAVE_NEON)
    case Backend::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

Backend active_backend() noexcept { return active().backend; }

void force_backend(std::optional<Backend> backend) {
  g_active.store(backend ? &table(*backend) : automatic(), std::memory_order_release);
}

double lattice_dist2(std::span<const double> y) { return active().lattice_dist2(y.data(), y.size()); }

double weighted_scaled_lattice_dist2(std::span<const double> x, std::span<const double> scale,
                                     std::span<const double> weight) {
  if (scale.size() != x.size() || weight.size() != x.size()) {
    throw std::invalid_argument("weighted_scaled_lattice_dist2: length mismatch");
  }
  return active().weighted_scaled_lattice_dist2(x.data(), scale.data(), weight.data(), x.size());
}

std::size_t ball_count(std::span<const double> coords, std::size_t count, std::size_t dim,
                       std::span<const double> center, double radius2) {
  if (coords.size() != count * dim || center.size() != dim) {
    throw std::invalid_argument("ball_count: shape mismatch");
  }
  return active().ball_count(coords.data(), count, dim, center.data(), radius2);
}

}  // namespace rankprobe::kernels
