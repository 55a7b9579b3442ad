#pragma once

#include <span>
#include <vector>

#include "cvshadow/fock.hpp"
#include "cvshadow/quadrature.hpp"
#include "cvshadow/rng.hpp"
#include "cvshadow/shadow.hpp"

namespace cvshadow {

struct HomodyneSample {
  double theta = 0.0;  // local-oscillator phase in [0, pi)
  double x = 0.0;      // calibrated quadrature value
};

/// Throws std::invalid_argument for theta outside [0, pi) or non-finite x.
void validate(const HomodyneSample& s);

/// T independent draws: theta uniform on [0, pi), x from <x_theta|rho|x_theta>.
std::vector<HomodyneSample> draw_homodyne(const QuadratureSampler& sampler, Rng& rng,
                                          std::size_t count);
std::vector<HomodyneSample> draw_homodyne(const FockOperator& rho, Rng& rng, std::size_t count);

/// Builds P_N F(x, theta) P_N with entries e^{i(m-n)theta} f_mn(x). Every
/// homodyne estimate in the library goes through add_to().
class HomodyneSnapshots {
 public:
  HomodyneSnapshots(const PatternEvaluator& evaluator, int N);

  int dim() const { return N_; }
  void add_to(Matrix& sum, const HomodyneSample& s, double weight = 1.0) const;
  void add_to(Shadow& shadow, const HomodyneSample& s) const;

 private:
  const PatternEvaluator* evaluator_;
  int N_;
  mutable std::vector<double> row_;
};

FockOperator homodyne_snapshot(const HomodyneSample& s, const PatternEvaluator& evaluator, int N);

Shadow homodyne_shadow(std::span<const HomodyneSample> samples, const PatternEvaluator& evaluator,
                       int N);

/// Count-weighted mean of snapshots. Hermitian, not PSD in general.
FockOperator shadow_estimate(std::span<const HomodyneSample> samples,
                             const PatternEvaluator& evaluator, int N);

}  // namespace cvshadow
