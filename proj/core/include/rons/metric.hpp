#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Cholesky>

#include "rons/types.hpp"

namespace rons {

/// Gram matrix of the modes, M_ij = <phi_i, phi_j>. The factorization is
/// computed once at construction and shared between copies; M^{-1} is never
/// formed.
class MetricTensor {
 public:
  enum class Kind { dense, block_diagonal, diagonal };

  MetricTensor() = default;

  static MetricTensor dense(Matrix m);
  static MetricTensor diagonal(Vector d);

  Kind kind() const { return kind_; }
  std::size_t size() const { return size_; }

  /// Sizes of the diagonal blocks (one entry for non-block metrics).
  const std::vector<std::size_t>& block_sizes() const { return block_sizes_; }

  /// Diagonal entries; valid for every kind.
  Vector diagonal_entries() const;
  Matrix to_dense() const;

  /// Returns M^{-1} rhs. Throws SingularMetricError when M is not SPD.
  Vector solve(const Vector& rhs) const;
  Vector apply(const Vector& x) const;

 private:
  friend MetricTensor assemble_block_metric(const std::vector<MetricTensor>& blocks);

  struct Factor {
    Eigen::LLT<Matrix> llt;
    bool ok = false;
  };

  Kind kind_ = Kind::diagonal;
  std::size_t size_ = 0;
  Matrix dense_;
  Vector diag_;
  Vector inv_diag_;
  bool diag_positive_ = false;
  std::shared_ptr<const Factor> factor_;
  std::vector<MetricTensor> blocks_;
  std::vector<std::size_t> block_sizes_;
};

/// Validates a symmetric matrix of mode pairings and wraps it. Off-diagonal
/// entries at or below 1e-14 * max diagonal make the result diagonal.
MetricTensor assemble_metric(const Matrix& inner_products);

/// diag(M_1, ..., M_p). All-diagonal inputs stay diagonal; block sizes are
/// kept so component boundaries are recoverable.
MetricTensor assemble_block_metric(const std::vector<MetricTensor>& blocks);

/// Real form of a complex Gram matrix, pairings taken linear in the first
/// slot (M~_ij = sum phi_i conj(phi_j)): [[Re M~, Im M~], [-Im M~, Re M~]].
MetricTensor complexify_metric(const ComplexMatrix& complex_pairings);

}  // namespace rons
