#pragma once

// Restricted-invertibility column selection and the projection deficit of
// selected columns against the span of the others.

#include <cstddef>
#include <ostream>
#include <vector>

#include "rankprobe/linalg.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::selection {

/// min over r in {l+1..k} of sqrt(d r / ((r - l) sum_{i=r}^{k} s_i^2)) for
/// the k singular values of a k x d matrix. Throws DomainError when the
/// spectrum is rank deficient at the default tolerance, d < k, or l is
/// outside 1..k-1.
double ri_bound_rhs(const linalg::SingularSpectrum& spectrum, std::size_t d, std::size_t l);

enum class SelectionMode { exhaustive, greedy };

/// Column indices are 0-based.
struct SelectionCertificate {
  std::vector<std::size_t> indices;
  double s_l_selected;
  double rhs_bound;
  double ratio;  // (1 / s_l_selected) / rhs_bound
};

/// Smallest singular value of the k x |indices| submatrix.
double selected_s_min(const Matrix& M, const std::vector<std::size_t>& indices);

/// exhaustive: subset of l columns maximising s_l, ties to the
/// lexicographically smallest index set; requires C(d, l) <= 1e6 (else
/// ResourceError). greedy: adds the column that maximises the running
/// smallest singular value, ties to the lowest index.
SelectionCertificate ri_select(const Matrix& M, std::size_t l, SelectionMode mode, unsigned threads = 1);

/// Sum over selected columns of dist^2(A_i, span{A_j : j in excluded}).
/// Throws DomainError on out-of-range or overlapping indices.
double projection_deficit(const Matrix& A, const std::vector<std::size_t>& selected,
                          const std::vector<std::size_t>& excluded);

/// Header `indices,s_l,rhs,ratio`; indices joined with ';'.
void write_certificate_header(std::ostream& out);
void write_certificate_row(std::ostream& out, const SelectionCertificate& cert);

}  // namespace rankprobe::selection
