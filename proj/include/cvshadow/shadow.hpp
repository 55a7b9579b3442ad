#pragma once

#include <cstddef>

#include "cvshadow/fock.hpp"

namespace cvshadow {

/// Running sum of snapshot operators and the number of draws behind it.
///
/// Shadows store sums rather than means, so merging is exact and
/// order-independent up to floating-point addition. Draws that produce no
/// snapshot (discarded PNR outcomes) still count towards the size.
class Shadow {
 public:
  explicit Shadow(int dim) : sum_(Matrix::Zero(dim, dim)) {}

  int dim() const { return static_cast<int>(sum_.rows()); }
  std::size_t count() const { return count_; }
  const Matrix& sum() const { return sum_; }

  void add(const Matrix& snapshot);
  void add(const FockOperator& snapshot) { add(snapshot.matrix()); }

  /// Record `n` draws that contribute a zero snapshot.
  void add_empty(std::size_t n) { count_ += n; }

  /// Direct access for snapshot builders that accumulate in place; the
  /// caller is responsible for calling note_added().
  Matrix& mutable_sum() { return sum_; }
  void note_added(std::size_t n = 1) { count_ += n; }

  /// sum / count. Hermitian when the snapshots are, but not PSD in general.
  FockOperator estimate() const;

  static Shadow merge(const Shadow& a, const Shadow& b);

 private:
  Matrix sum_;
  std::size_t count_ = 0;
};

/// Replace negative eigenvalues of a Hermitian estimate with zero.
/// Off by default everywhere; the reported error metric uses the raw
/// estimator.
FockOperator clip_negative_eigenvalues(const FockOperator& estimate);

}  // namespace cvshadow
