#pragma once

// Deterministic matrix analysis. Decompositions are Eigen's SVD routines;
// everything here is a pure function of its inputs.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankprobe/types.hpp"

namespace rankprobe::linalg {

/// Singular values s_1 >= ... >= s_min(rows, cols) >= 0.
struct SingularSpectrum {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double largest() const { return values.empty() ? 0.0 : values.front(); }
  double smallest() const { return values.empty() ? 0.0 : values.back(); }
  /// s_i with the 1-based index used in the literature.
  double s(std::size_t i) const { return values.at(i - 1); }
};

/// Throws InputError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

SingularSpectrum singular_spectrum(const Matrix& m);

/// max(rows, cols) * machine epsilon * s_1.
double default_rank_tolerance(std::size_t rows, std::size_t cols, const SingularSpectrum& spectrum);

/// Number of singular values strictly greater than tol.
std::size_t numerical_rank(const SingularSpectrum& spectrum, double tol);

struct Norms {
  double operator_norm;
  double hs_norm;
};

Norms norms(const Matrix& m);

/// Orthogonal projector onto the complement of span(columns).
class ComplementProjector {
 public:
  /// columns is n x c (c may be 0). Span dimension uses cutoff
  /// 1e-10 * s_1 on the column matrix's singular values.
  explicit ComplementProjector(const Matrix& columns);

  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(span_basis_.rows()); }
  std::size_t span_dim() const noexcept { return static_cast<std::size_t>(span_basis_.cols()); }
  std::size_t rank() const noexcept { return ambient_dim() - span_dim(); }

  /// Orthonormal basis of the span (n x span_dim).
  const Matrix& span_basis() const noexcept { return span_basis_; }
  /// Orthonormal basis of the complement (n x rank), ordered from the
  /// weakest direction of the column matrix outward.
  const Matrix& complement_basis() const noexcept { return complement_basis_; }

  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;
  /// Dense n x n projector matrix.
  Matrix matrix() const;
  /// Euclidean distance from x to the span.
  double distance(const Vector& x) const { return apply(x).norm(); }

 private:
  Matrix span_basis_;
  Matrix complement_basis_;
};

inline ComplementProjector complement_projector(const Matrix& columns) { return ComplementProjector(columns); }

struct MinMaxWitness {
  double value;
  /// n x k, orthonormal columns z_1..z_k spanning the minimising subspace.
  Matrix witness;
};

/// s_{n-k+1}(M) for square M together with the bottom-k right singular
/// vectors, which attain the min-max characterisation. Throws DomainError
/// unless 1 <= k <= n.
MinMaxWitness minmax_kth_smallest(const Matrix& m, std::size_t k);

/// max over unit x in span(basis) of ||M x||, basis orthonormal.
double max_gain_on_subspace(const Matrix& m, const Matrix& basis);

/// Matrix text: first line `rows,cols`, then one comma-separated row per
/// line, 17 significant digits.
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

}  // namespace rankprobe::linalg
