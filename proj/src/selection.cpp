#include "rankprobe/selection.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rankprobe/errors.hpp"
#include "rankprobe/parallel.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::selection {

namespace {

constexpr double kExhaustiveLimit = 1e6;

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

// rank-th l-subset of {0..d-1} in lexicographic order.
std::vector<std::size_t> unrank_combination(std::size_t rank, std::size_t d, std::size_t l) {
  std::vector<std::size_t> out;
  out.reserve(l);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < l; ++slot) {
    for (std::size_t v = next;; ++v) {
      const auto block = static_cast<std::size_t>(binomial(d - v - 1, l - slot - 1));
      if (rank < block) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return out;
}

bool next_combination(std::vector<std::size_t>& c, std::size_t d) {
  const std::size_t l = c.size();
  for (std::size_t i = l; i-- > 0;) {
    if (c[i] < d - l + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < l; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

void require_full_rank(const linalg::SingularSpectrum& spectrum, std::size_t k, std::size_t d) {
  if (spectrum.size() != k || d < k) throw DomainError("restricted invertibility needs a k x d matrix with k <= d");
  const double tol = linalg::default_rank_tolerance(k, d, spectrum);
  if (!(spectrum.smallest() > tol)) throw DomainError("restricted invertibility needs a full-rank matrix");
}

}  // namespace

double ri_bound_rhs(const linalg::SingularSpectrum& spectrum, std::size_t d, std::size_t l) {
  const std::size_t k = spectrum.size();
  require_full_rank(spectrum, k, d);
  if (l < 1 || l + 1 > k) throw DomainError("ri_bound_rhs: l must lie in 1..k-1");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = l + 1; r <= k; ++r) {
    double tail = 0.0;
    for (std::size_t i = r; i <= k; ++i) tail += spectrum.s(i) * spectrum.s(i);
    const double value = std::sqrt(static_cast<double>(d) * static_cast<double>(r) /
                                   (static_cast<double>(r - l) * tail));
    best = std::min(best, value);
  }
  return best;
}

double selected_s_min(const Matrix& M, const std::vector<std::size_t>& indices) {
  Matrix sub(M.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = M.col(static_cast<Eigen::Index>(indices[c]));
  if (indices.size() == 1) return sub.norm();
  Eigen::JacobiSVD<Matrix> svd(sub);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

SelectionCertificate ri_select(const Matrix& M, std::size_t l, SelectionMode mode, unsigned threads) {
  linalg::require_finite(M, "ri_select");
  const auto d = static_cast<std::size_t>(M.cols());
  const auto spectrum = linalg::singular_spectrum(M);
  const double rhs = ri_bound_rhs(spectrum, d, l);

  SelectionCertificate cert;
  if (mode == SelectionMode::exhaustive) {
    const double total = binomial(d, l);
    if (total > kExhaustiveLimit) {
      throw ResourceError("ri_select: C(" + std::to_string(d) + ", " + std::to_string(l) +
                          ") subsets exceed the exhaustive budget of 1e6");
    }
    const auto count = static_cast<std::size_t>(total);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    std::vector<double> block_best(workers, -1.0);
    std::vector<std::vector<std::size_t>> block_arg(workers);
    parallel_blocks(count, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
      if (begin == end) return;
      auto comb = unrank_combination(begin, d, l);
      for (std::size_t rank = begin; rank < end; ++rank) {
        const double s = selected_s_min(M, comb);
        if (s > block_best[w]) {
          block_best[w] = s;
          block_arg[w] = comb;
        }
        next_combination(comb, d);
      }
    });
    double best = -1.0;
    for (unsigned w = 0; w < workers; ++w) {
      if (block_best[w] > best) {
        best = block_best[w];
        cert.indices = block_arg[w];
      }
    }
    cert.s_l_selected = best;
  } else {
    std::vector<bool> used(d, false);
    double current = 0.0;
    for (std::size_t step = 0; step < l; ++step) {
      double best = -1.0;
      std::size_t arg = d;
      for (std::size_t j = 0; j < d; ++j) {
        if (used[j]) continue;
        auto trial = cert.indices;
        trial.push_back(j);
        const double s = selected_s_min(M, trial);
        if (s > best) {
          best = s;
          arg = j;
        }
      }
      used[arg] = true;
      cert.indices.push_back(arg);
      current = best;
    }
    std::sort(cert.indices.begin(), cert.indices.end());
    cert.s_l_selected = current;
  }

  if (!(cert.s_l_selected > 0.0)) throw DegenerateInstanceError("ri_select: selected columns are singular");
  cert.rhs_bound = rhs;
  cert.ratio = (1.0 / cert.s_l_selected) / rhs;
  return cert;
}

double projection_deficit(const Matrix& A, const std::vector<std::size_t>& selected,
                          const std::vector<std::size_t>& excluded) {
  linalg::require_finite(A, "projection_deficit");
  const auto cols = static_cast<std::size_t>(A.cols());
  std::vector<bool> seen(cols, false);
  for (const auto* set : {&selected, &excluded}) {
    for (std::size_t j : *set) {
      if (j >= cols) throw DomainError("projection_deficit: column index out of range");
      if (seen[j]) throw DomainError("projection_deficit: index sets overlap or repeat");
      seen[j] = true;
    }
  }
  Matrix H(A.rows(), static_cast<Eigen::Index>(excluded.size()));
  for (std::size_t c = 0; c < excluded.size(); ++c) H.col(static_cast<Eigen::Index>(c)) = A.col(static_cast<Eigen::Index>(excluded[c]));
  const linalg::ComplementProjector proj(H);
  double total = 0.0;
  for (std::size_t j : selected) total += proj.apply(Vector(A.col(static_cast<Eigen::Index>(j)))).squaredNorm();
  return total;
}

void write_certificate_header(std::ostream& out) { out << "indices,s_l,rhs,ratio\n"; }

void write_certificate_row(std::ostream& out, const SelectionCertificate& cert) {
  for (std::size_t i = 0; i < cert.indices.size(); ++i) out << (i ? ";" : "") << cert.indices[i];
  out << ',' << text::format_double(cert.s_l_selected) << ',' << text::format_double(cert.rhs_bound) << ','
      << text::format_double(cert.ratio) << '\n';
}

}  // namespace rankprobe::selection
