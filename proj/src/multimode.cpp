#include "cvshadow/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvshadow {

void ModeSubset::validate(int mode_count) const {
  if (modes.empty()) throw std::invalid_argument("mode subset is empty");
  int prev = -1;
  for (int m : modes) {
    if (m < 0 || m >= mode_count) throw std::invalid_argument("mode subset: index out of range");
    if (m <= prev) throw std::invalid_argument("mode subset: indices must be strictly increasing");
    prev = m;
  }
}

MultimodeSampler::MultimodeSampler(const FockOperator& rho, std::vector<int> dims, int grid_points)
    : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("MultimodeSampler: no modes");
  long total = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("MultimodeSampler: mode dimension must be positive");
    total *= d;
  }
  if (total != rho.dim()) throw std::invalid_argument("MultimodeSampler: dims do not match the state");
  if (!rho.is_hermitian(1e-10)) throw std::invalid_argument("MultimodeSampler: non-Hermitian state");

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Eigen::VectorXd& w = es.eigenvalues();
  const double top = w.maxCoeff();
  if (!(top > 0.0)) throw std::domain_error("MultimodeSampler: state has no positive weight");
  double acc = 0.0;
  for (int i = static_cast<int>(w.size()) - 1; i >= 0; --i) {
    if (w[i] < -1e-9 * std::max(1.0, top)) throw std::domain_error("MultimodeSampler: state is not PSD");
    if (w[i] <= 1e-14 * top) continue;
    components_.push_back(es.eigenvectors().col(i) * std::sqrt(w[i]));
    acc += w[i];
    cumulative_.push_back(acc);
  }
  for (int d : dims_) quadrature_.emplace_back(d, grid_points);
}

const Vector& MultimodeSampler::pick_component(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t i = std::min<std::size_t>(it - cumulative_.begin(), components_.size() - 1);
  return components_[i];
}

namespace {

// psi viewed as (d x rest) with psi[i * rest + r] at (i, r).
Matrix leading_mode(const Vector& psi, int d) {
  const long rest = psi.size() / d;
  Matrix out(d, rest);
  for (int i = 0; i < d; ++i)
    for (long r = 0; r < rest; ++r) out(i, r) = psi[i * rest + r];
  return out;
}

// <c|_0 psi for a bra with amplitudes conj(c): sum_i conj(c_i) Psi(i, :).
Vector condition(const Matrix& psi_mat, const Vector& c) {
  return (c.adjoint() * psi_mat).transpose();
}

}  // namespace

MultimodeDraw MultimodeSampler::draw_homodyne(Rng& rng, std::size_t count) const {
  if (count == 0) throw std::invalid_argument("draw_homodyne: count must be positive");
  MultimodeDraw out;
  out.samples.reserve(count);
  std::vector<double> ps;
  for (std::size_t t = 0; t < count; ++t) {
    Vector psi = pick_component(rng);
    MultimodeSample shot;
    shot.per_mode.reserve(dims_.size());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const int d = dims_[k];
      const Matrix mat = leading_mode(psi, d);
      const Matrix reduced = mat * mat.adjoint();
      const double theta = kPi * rng.uniform();
      const double x = quadrature_[k].sample_x(reduced, theta, rng);
      shot.per_mode.emplace_back(HomodyneSample{theta, x});
      if (k + 1 == dims_.size()) break;
      // |x_theta> has amplitudes <m|x_theta> = e^{i m theta} psi_m(x)
      ps.resize(d);
      psi_all(x, ps);
      Vector ket(d);
      for (int m = 0; m < d; ++m) ket[m] = std::polar(ps[m], m * theta);
      psi = condition(mat, ket);
    }
    out.samples.push_back(std::move(shot));
  }
  return out;
}

MultimodeDraw MultimodeSampler::pnr_shots(const TParams& params, int limit, bool discard, Rng& rng,
                                          std::size_t count) const {
  MultimodeDraw out;
  out.samples.reserve(count);
  Vector column;
  for (std::size_t t = 0; t < count; ++t) {
    Vector psi = pick_component(rng);
    MultimodeSample shot;
    bool kept = true;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const Matrix mat = leading_mode(psi, dims_[k]);
      const Complex alpha = sample_disk(params.alpha_max, rng);
      int n = PnrSampler::from_factor(mat).sample_n(alpha, limit, rng, &column);
      if (n < 0) {
        if (discard) {
          kept = false;
          break;
        }
        // beyond the record cap: condition on the last resolved level
        n = limit;
        column = displacement(alpha, dims_[k], limit + 1).col(limit);
      }
      shot.per_mode.emplace_back(PnrSample{n, alpha});
      if (k + 1 < dims_.size()) psi = condition(mat, column);
    }
    if (kept)
      out.samples.push_back(std::move(shot));
    else
      ++out.discarded;
  }
  return out;
}

MultimodeDraw MultimodeSampler::draw_pnr(const TParams& params, int N, Rng& rng,
                                         std::size_t count) const {
  params.validate();
  if (N < 1) throw std::invalid_argument("draw_pnr: N must be positive");
  if (count == 0) throw std::invalid_argument("draw_pnr: count must be positive");
  return pnr_shots(params, N, true, rng, count);
}

std::vector<MultimodeSample> MultimodeSampler::draw_pnr_outcomes(const TParams& params, Rng& rng,
                                                                 std::size_t count) const {
  params.validate();
  if (count == 0) throw std::invalid_argument("draw_pnr_outcomes: count must be positive");
  int cap = 0;
  for (int d : dims_) cap = std::max(cap, pnr_record_cap(d, params.alpha_max));
  return pnr_shots(params, cap, false, rng, count).samples;
}

MultimodeDraw filter_pnr(std::span<const MultimodeSample> records, int N) {
  if (N < 1) throw std::invalid_argument("filter_pnr: N must be positive");
  MultimodeDraw out;
  for (const auto& shot : records) {
    bool kept = true;
    for (const auto& m : shot.per_mode) {
      const auto* s = std::get_if<PnrSample>(&m);
      if (!s) throw std::invalid_argument("filter_pnr: non-PNR outcome");
      if (s->n < 0) throw std::invalid_argument("PNR record: negative photon number");
      kept = kept && s->n < N;
    }
    if (kept)
      out.samples.push_back(shot);
    else
      ++out.discarded;
  }
  return out;
}

ModeSnapshots::ModeSnapshots(const PatternEvaluator& evaluator, int N)
    : protocol_(Protocol::homodyne), N_(N), evaluator_(&evaluator) {
  if (N < 1 || N > evaluator.cutoff())
    throw std::invalid_argument("ModeSnapshots: N must be in [1, evaluator cutoff]");
}

ModeSnapshots::ModeSnapshots(const TParams& params, int N)
    : protocol_(Protocol::pnr), N_(N), params_(params) {
  params_.validate();
  if (N < 1) throw std::invalid_argument("ModeSnapshots: N must be positive");
}

Matrix ModeSnapshots::snapshot(const ModeOutcome& outcome) const {
  Matrix m = Matrix::Zero(N_, N_);
  if (protocol_ == Protocol::homodyne) {
    const auto* s = std::get_if<HomodyneSample>(&outcome);
    if (!s) throw std::invalid_argument("mixed-protocol samples are not supported");
    validate(*s);
    HomodyneSnapshots(*evaluator_, N_).add_to(m, *s);
  } else {
    const auto* s = std::get_if<PnrSample>(&outcome);
    if (!s) throw std::invalid_argument("mixed-protocol samples are not supported");
    PnrSnapshots(params_, N_).add_to(m, *s);
  }
  return m;
}

namespace {

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

Matrix tensor_snapshot(const MultimodeSample& sample, std::span<const int> modes,
                       const ModeSnapshots& builder) {
  Matrix out = builder.snapshot(sample.per_mode.at(modes[0]));
  for (std::size_t i = 1; i < modes.size(); ++i)
    out = kron(out, builder.snapshot(sample.per_mode.at(modes[i])));
  return out;
}

long power(int base, std::size_t exp) {
  long out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

FockOperator multimode_snapshot(const MultimodeSample& sample, const ModeSnapshots& builder) {
  if (sample.per_mode.empty()) throw std::invalid_argument("multimode sample has no modes");
  std::vector<int> all(sample.per_mode.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return FockOperator(tensor_snapshot(sample, all, builder));
}

Shadow multimode_shadow(std::span<const MultimodeSample> samples, const ModeSnapshots& builder,
                        std::size_t discarded) {
  if (samples.empty()) throw std::invalid_argument("multimode_shadow: empty sample set");
  const std::size_t M = samples[0].per_mode.size();
  ModeSubset all;
  for (std::size_t i = 0; i < M; ++i) all.modes.push_back(static_cast<int>(i));
  return reduced_shadow(samples, all, builder, discarded);
}

Shadow reduced_shadow(std::span<const MultimodeSample> samples, const ModeSubset& subset,
                      const ModeSnapshots& builder, std::size_t discarded) {
  if (samples.empty()) throw std::invalid_argument("reduced_shadow: empty sample set");
  const std::size_t M = samples[0].per_mode.size();
  subset.validate(static_cast<int>(M));
  Shadow shadow(static_cast<int>(power(builder.dim(), subset.modes.size())));
  for (const auto& s : samples) {
    if (s.per_mode.size() != M) throw std::invalid_argument("multimode samples differ in mode count");
    shadow.add(tensor_snapshot(s, subset.modes, builder));
  }
  shadow.add_empty(discarded);
  return shadow;
}

FockOperator two_mode_cat(Complex alpha, int cutoff, bool entangled) {
  if (cutoff < 1) throw std::invalid_argument("two_mode_cat: cutoff must be positive");
  const double x = std::norm(alpha);
  Vector c(cutoff);  // unnormalized coherent amplitudes alpha^n / sqrt(n!) e^{-|alpha|^2/2}
  Complex v = std::exp(-0.5 * x);
  for (int n = 0; n < cutoff; ++n) {
    c[n] = v;
    v *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  Vector psi(cutoff * cutoff);
  if (entangled) {
    // |a,a> + |-a,-a>, norm^2 = 2 (1 + e^{-4|a|^2})
    const double norm = std::sqrt(2.0 * (1.0 + std::exp(-4.0 * x)));
    for (int m = 0; m < cutoff; ++m)
      for (int n = 0; n < cutoff; ++n)
        psi[m * cutoff + n] = ((m + n) % 2 == 0 ? 2.0 : 0.0) * c[m] * c[n] / norm;
  } else {
    const double norm = std::sqrt(2.0 * (1.0 + std::exp(-2.0 * x)));
    Vector cat(cutoff);
    for (int n = 0; n < cutoff; ++n) cat[n] = (n % 2 == 0 ? 2.0 : 0.0) * c[n] / norm;
    for (int m = 0; m < cutoff; ++m)
      for (int n = 0; n < cutoff; ++n) psi[m * cutoff + n] = cat[m] * cat[n];
  }
  return FockOperator(psi * psi.adjoint());
}

FockOperator product_state(std::span<const StateSpec> modes) {
  if (modes.empty()) throw std::invalid_argument("product_state: no modes");
  std::vector<FockOperator> parts;
  for (const auto& m : modes) parts.push_back(make_state(m));
  return tensor(parts);
}

}  // namespace cvshadow
