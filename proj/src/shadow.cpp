#include "cvshadow/shadow.hpp"

#include <stdexcept>

namespace cvshadow {

void Shadow::add(const Matrix& snapshot) {
  if (snapshot.rows() != sum_.rows() || snapshot.cols() != sum_.cols())
    throw std::invalid_argument("Shadow::add: dimension mismatch");
  sum_ += snapshot;
  ++count_;
}

FockOperator Shadow::estimate() const {
  if (count_ == 0) throw std::domain_error("Shadow::estimate: empty sample set");
  return FockOperator(sum_ / static_cast<double>(count_));
}

Shadow Shadow::merge(const Shadow& a, const Shadow& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Shadow::merge: dimension mismatch");
  Shadow out(a.dim());
  out.sum_ = a.sum_ + b.sum_;
  out.count_ = a.count_ + b.count_;
  return out;
}

FockOperator clip_negative_eigenvalues(const FockOperator& estimate) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(estimate.matrix());
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return FockOperator(es.eigenvectors() * ev.cast<Complex>().asDiagonal() *
                      es.eigenvectors().adjoint());
}

}  // namespace cvshadow
