#include "cvshadow/homodyne.hpp"

#include <cmath>
#include <stdexcept>

namespace cvshadow {

void validate(const HomodyneSample& s) {
  if (!(s.theta >= 0.0 && s.theta < kPi)) throw std::invalid_argument("homodyne sample: theta outside [0, pi)");
  if (!std::isfinite(s.x)) throw std::invalid_argument("homodyne sample: non-finite x");
}

std::vector<HomodyneSample> draw_homodyne(const QuadratureSampler& sampler, Rng& rng,
                                          std::size_t count) {
  if (count == 0) throw std::invalid_argument("draw_homodyne: count must be positive");
  std::vector<HomodyneSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = kPi * rng.uniform();
    out.push_back({theta, sampler.sample_x(theta, rng)});
  }
  return out;
}

std::vector<HomodyneSample> draw_homodyne(const FockOperator& rho, Rng& rng, std::size_t count) {
  if (count == 0) throw std::invalid_argument("draw_homodyne: count must be positive");
  return draw_homodyne(QuadratureSampler(rho), rng, count);
}

HomodyneSnapshots::HomodyneSnapshots(const PatternEvaluator& evaluator, int N)
    : evaluator_(&evaluator), N_(N), row_(evaluator.pair_count()) {
  if (N < 1 || N > evaluator.cutoff())
    throw std::invalid_argument("HomodyneSnapshots: N must be in [1, evaluator cutoff]");
}

void HomodyneSnapshots::add_to(Matrix& sum, const HomodyneSample& s, double weight) const {
  evaluator_->evaluate(s.x, row_);
  const Complex step = std::polar(1.0, s.theta);
  Complex phase_d = 1.0;  // e^{i d theta}, d = n - m
  for (int d = 0; d < N_; ++d) {
    for (int m = 0; m + d < N_; ++m) {
      const int n = m + d;
      const double f = weight * row_[PatternEvaluator::pair_index(m, n)];
      // F_mn = e^{i(m-n)theta} f_mn
      const Complex v = std::conj(phase_d) * f;
      sum(m, n) += v;
      if (d != 0) sum(n, m) += std::conj(v);
    }
    phase_d *= step;
  }
}

void HomodyneSnapshots::add_to(Shadow& shadow, const HomodyneSample& s) const {
  add_to(shadow.mutable_sum(), s);
  shadow.note_added();
}

FockOperator homodyne_snapshot(const HomodyneSample& s, const PatternEvaluator& evaluator, int N) {
  validate(s);
  Matrix m = Matrix::Zero(N, N);
  HomodyneSnapshots(evaluator, N).add_to(m, s);
  return FockOperator(std::move(m));
}

Shadow homodyne_shadow(std::span<const HomodyneSample> samples, const PatternEvaluator& evaluator,
                       int N) {
  HomodyneSnapshots builder(evaluator, N);
  Shadow shadow(N);
  for (const auto& s : samples) {
    validate(s);
    builder.add_to(shadow, s);
  }
  return shadow;
}

FockOperator shadow_estimate(std::span<const HomodyneSample> samples,
                             const PatternEvaluator& evaluator, int N) {
  if (samples.empty()) throw std::invalid_argument("shadow_estimate: empty sample set");
  return homodyne_shadow(samples, evaluator, N).estimate();
}

}  // namespace cvshadow
