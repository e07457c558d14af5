#pragma once

#include <cstddef>
#include <vector>

#include "rankprobe/random.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::sphere {

/// Parameters for sparse/compressible classification (delta, rho),
/// almost-orthogonality (nu) and the compressible-case threshold (tau).
/// All must lie strictly inside (0, 1).
struct SphereParams {
  double delta;
  double rho;
  double nu;
  double tau;

  void validate() const;
};

/// floor(delta * n), the largest support size of a delta-sparse vector.
std::size_t sparse_count(std::size_t n, double delta);

/// Exact Euclidean distance from x to the delta-sparse vectors: the norm of
/// x after removing its floor(delta * n) largest-magnitude coordinates.
double dist_to_sparse(const Vector& x, double delta);

enum class VectorClass { compressible, incompressible };

/// Compressible iff dist_to_sparse(x, delta) <= rho. Rejects inputs whose
/// norm differs from 1 by more than 1e-8 (DomainError) instead of
/// normalising them.
VectorClass classify_vector(const Vector& x, double delta, double rho);

struct SpreadResult {
  /// 0-based indices i with rho/sqrt(2n) <= |u_i| <= 1/sqrt(delta n).
  std::vector<std::size_t> indices;
  bool pass;  // |indices| >= rho^2 delta n / 2
};

SpreadResult spread_coordinates(const Vector& u, double delta, double rho);

struct AlmostOrthogonalResult {
  bool pass;
  double s_min;
  double s_max;
};

/// Normalises each column of `tuple` (n x l) and checks
/// 1 - nu <= s_l <= s_1 <= 1 + nu. Throws DomainError on a zero column or
/// l > n.
AlmostOrthogonalResult almost_orthogonal_check(const Matrix& tuple, double nu);

struct SpanSampleResult {
  bool all_incompressible;
  /// Smallest dist_to_sparse seen over the sampled unit directions.
  double min_dist;
  std::size_t samples;
};

/// Samples unit directions of span(columns) (Gaussian coefficients, plus
/// the columns themselves) and checks each for Incomp(delta, rho). This is
/// a sampled check, not a certificate.
SpanSampleResult sample_span_incompressible(const Matrix& columns, double delta, double rho, std::size_t samples,
                                            RandomStream& stream);

}  // namespace rankprobe::sphere
