#include "rankprobe/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "rankprobe/errors.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::linalg {

namespace {

constexpr double kSpanCutoff = 1e-10;

SingularSpectrum to_spectrum(const Vector& sv) {
  SingularSpectrum s;
  s.values.assign(sv.data(), sv.data() + sv.size());
  // Eigen already sorts, but clamp tiny negative round-off.
  for (double& v : s.values) v = std::max(v, 0.0);
  return s;
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
}

SingularSpectrum singular_spectrum(const Matrix& m) {
  require_finite(m, "singular_spectrum");
  if (m.size() == 0) return {};
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return to_spectrum(svd.singularValues());
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return to_spectrum(svd.singularValues());
}

double default_rank_tolerance(std::size_t rows, std::size_t cols, const SingularSpectrum& spectrum) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * spectrum.largest();
}

std::size_t numerical_rank(const SingularSpectrum& spectrum, double tol) {
  return static_cast<std::size_t>(
      std::count_if(spectrum.values.begin(), spectrum.values.end(), [tol](double s) { return s > tol; }));
}

Norms norms(const Matrix& m) {
  require_finite(m, "norms");
  return {singular_spectrum(m).largest(), m.norm()};
}

ComplementProjector::ComplementProjector(const Matrix& columns) {
  require_finite(columns, "complement_projector");
  const Eigen::Index n = columns.rows();
  if (columns.cols() == 0 || columns.isZero(0.0)) {
    span_basis_ = Matrix(n, 0);
    complement_basis_ = Matrix::Identity(n, n);
    return;
  }
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();
  const double cutoff = kSpanCutoff * s(0);
  Eigen::Index dim = 0;
  while (dim < s.size() && s(dim) > cutoff) ++dim;
  const Matrix& u = svd.matrixU();
  span_basis_ = u.leftCols(dim);
  // Columns of U past the span dimension, last one first: the weakest
  // directions of the column matrix come first.
  complement_basis_ = u.rightCols(n - dim).rowwise().reverse();
}

Vector ComplementProjector::apply(const Vector& x) const {
  return x - span_basis_ * (span_basis_.transpose() * x);
}

Matrix ComplementProjector::apply(const Matrix& x) const {
  return x - span_basis_ * (span_basis_.transpose() * x);
}

Matrix ComplementProjector::matrix() const {
  const auto n = static_cast<Eigen::Index>(ambient_dim());
  return Matrix::Identity(n, n) - span_basis_ * span_basis_.transpose();
}

MinMaxWitness minmax_kth_smallest(const Matrix& m, std::size_t k) {
  require_finite(m, "minmax_kth_smallest");
  if (m.rows() != m.cols()) throw DomainError("minmax_kth_smallest: matrix must be square");
  const auto n = static_cast<std::size_t>(m.rows());
  if (k < 1 || k > n) throw DomainError("minmax_kth_smallest: k must satisfy 1 <= k <= n");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto kk = static_cast<Eigen::Index>(k);
  return {svd.singularValues()(static_cast<Eigen::Index>(n - k)), svd.matrixV().rightCols(kk)};
}

double max_gain_on_subspace(const Matrix& m, const Matrix& basis) {
  return singular_spectrum(m * basis).largest();
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << text::format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("matrix csv: missing header");
  const auto header = text::split(line, ',');
  if (header.size() != 2) throw InputError("matrix csv: header must be 'rows,cols'");
  long rows = 0, cols = 0;
  try {
    rows = std::stol(std::string(header[0]));
    cols = std::stol(std::string(header[1]));
  } catch (const std::exception&) {
    throw InputError("matrix csv: header must be 'rows,cols'");
  }
  if (rows < 0 || cols < 0) throw InputError("matrix csv: negative shape");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw InputError("matrix csv: expected " + std::to_string(rows) + " rows");
    const auto cells = text::split(line, ',');
    if (static_cast<long>(cells.size()) != cols) {
      throw InputError("matrix csv: row " + std::to_string(i + 1) + " has wrong length");
    }
    for (long j = 0; j < cols; ++j) {
      try {
        m(i, j) = std::stod(std::string(cells[static_cast<std::size_t>(j)]));
      } catch (const std::exception&) {
        throw InputError("matrix csv: bad number in row " + std::to_string(i + 1));
      }
    }
  }
  return m;
}

}  // namespace rankprobe::linalg
