#include "cvshadow/displaced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvshadow {

namespace {

// -(1 - r)/(1 + r): the per-photon ratio of successive T-operator eigenvalues.
double ratio(double r) { return -(1.0 - r) / (1.0 + r); }

void check_r(double r) {
  if (!(r > -1.0 && r < 1.0)) throw std::invalid_argument("T-operator: r must lie in (-1, 1)");
}

void check_alpha(Complex alpha) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw std::invalid_argument("T-operator: non-finite alpha");
}

// Coherent amplitudes: the first column of D(alpha).
Vector first_column(Complex alpha, int rows) {
  Vector col(rows);
  Complex v = std::exp(-0.5 * std::norm(alpha));
  for (int m = 0; m < rows; ++m) {
    col[m] = v;
    v *= alpha / std::sqrt(static_cast<double>(m + 1));
  }
  return col;
}

// Normal-ordered form of D s^N D^dag:
//   e^{(s-1)|a|^2} sum_l s^l g^{j-l} conj(g)^{k-l} sqrt(j! k!) / (l! (j-l)! (k-l)!),  g = (1-s) a.
// Terms are combined in log space; used for s < -1 where the eigen-expansion
// would need growing weights.
Matrix normal_ordered(double s, Complex alpha, int N) {
  Matrix out(N, N);
  const Complex g = (1.0 - s) * alpha;
  const double lg = std::abs(g) > 0.0 ? std::log(std::abs(g)) : -std::numeric_limits<double>::infinity();
  const double phase = std::arg(g);
  const double ls = std::log(std::abs(s));
  const double base = (s - 1.0) * std::norm(alpha);
  std::vector<double> lf(N);
  for (int i = 0; i < N; ++i) lf[i] = std::lgamma(i + 1.0);
  for (int j = 0; j < N; ++j) {
    for (int k = j; k < N; ++k) {
      Complex acc = 0.0;
      for (int l = 0; l <= j; ++l) {
        const int a = j - l;
        const int b = k - l;
        if (std::abs(g) == 0.0 && (a + b) > 0) continue;
        const double lmag = base + l * ls + (a + b) * (a + b > 0 ? lg : 0.0) +
                            0.5 * (lf[j] + lf[k]) - lf[l] - lf[a] - lf[b];
        const double sign = (s < 0.0 && l % 2 == 1) ? -1.0 : 1.0;
        acc += sign * std::polar(std::exp(lmag), (a - b) * phase);
      }
      out(j, k) = acc;
      out(k, j) = std::conj(acc);
    }
  }
  return out;
}

// sum_m s^m D_jm conj(D_km) with enough columns that the tail is below tol.
Matrix eigen_sum(double s, Complex alpha, int N, int columns) {
  const Matrix d = displacement(alpha, N, columns);
  Eigen::VectorXd w(columns);
  double p = 1.0;
  for (int m = 0; m < columns; ++m) {
    w[m] = p;
    p *= s;
  }
  Matrix out = d * w.cast<Complex>().asDiagonal() * d.adjoint();
  return 0.5 * (out + out.adjoint());
}

int series_columns(double s, Complex alpha, int N, double tol) {
  const double x = std::norm(alpha);
  const double spread = std::sqrt(static_cast<double>(N)) + std::abs(alpha) + 10.0;
  int m = N + static_cast<int>(std::ceil(std::max(spread * spread, 3.0 * std::abs(s) * x))) + 60;
  if (std::abs(s) < 1.0) {
    const int geometric = N + static_cast<int>(std::ceil(std::log(tol) / std::log(std::abs(s)))) + 1;
    m = std::min(m, std::max(geometric, N + 1));
  }
  return m;
}

}  // namespace

void TParams::validate() const {
  check_r(r);
  if (!(alpha_max > 0.0) || !std::isfinite(alpha_max))
    throw std::invalid_argument("TParams: alpha_max must be positive");
}

TParams TParams::with_default_region(int N, double r) {
  if (N < 1) throw std::invalid_argument("TParams: N must be positive");
  TParams p{r, std::sqrt(4.0 * N)};
  p.validate();
  return p;
}

double lambda(int n, double r) {
  check_r(r);
  if (n < 0) throw std::invalid_argument("lambda: negative photon number");
  const double mag = std::exp(n * std::log(std::abs(ratio(r))));
  return 2.0 / (kPi * (1.0 + r)) * (n % 2 == 0 ? mag : -mag);
}

Complex displaced_overlap(int j, Complex alpha, int m) {
  if (j < 0 || m < 0) throw std::invalid_argument("displaced_overlap: negative index");
  return displacement(alpha, j + 1, m + 1)(j, m);
}

Matrix t_operator(double r, Complex alpha, int N) {
  check_r(r);
  check_alpha(alpha);
  if (N < 1) throw std::invalid_argument("t_operator: N must be positive");
  const double pref = 2.0 / (kPi * (1.0 + r));
  const double s = ratio(r);
  if (r == 0.0) {
    // D(alpha) Pi D(alpha)^dag = D(2 alpha) Pi
    const Matrix d = displacement(2.0 * alpha, N, N);
    Matrix out(N, N);
    for (int j = 0; j < N; ++j) {
      for (int k = j; k < N; ++k) {
        const Complex v = pref * d(j, k) * (k % 2 == 0 ? 1.0 : -1.0);
        out(j, k) = v;
        out(k, j) = std::conj(v);
      }
    }
    for (int j = 0; j < N; ++j) out(j, j) = out(j, j).real();
    return out;
  }
  if (r > 0.0) return pref * eigen_sum(s, alpha, N, series_columns(s, alpha, N, 1e-17));
  return pref * normal_ordered(s, alpha, N);
}

Matrix t_operator_series(double r, Complex alpha, int N, double tol) {
  check_r(r);
  check_alpha(alpha);
  if (N < 1) throw std::invalid_argument("t_operator_series: N must be positive");
  const double s = ratio(r);
  return 2.0 / (kPi * (1.0 + r)) * eigen_sum(s, alpha, N, series_columns(s, alpha, N, tol));
}

std::vector<double> displaced_number_distribution(const FockOperator& rho, Complex alpha,
                                                  double tail, int max_n) {
  check_alpha(alpha);
  const int D = rho.dim();
  if (D < 1) throw std::invalid_argument("displaced_number_distribution: empty state");
  const double tr = rho.trace();
  int cols = std::min(max_n, std::max(2 * D, 64));
  while (true) {
    const Matrix d = displacement(alpha, D, cols);
    // p_n = (D^dag rho D)_nn
    const Eigen::VectorXd p = (d.adjoint() * rho.matrix() * d).diagonal().real().cwiseMax(0.0);
    double acc = 0.0;
    for (int n = 0; n < cols; ++n) {
      acc += p[n];
      if (tr - acc < tail && n + 1 >= D) return std::vector<double>(p.data(), p.data() + n + 1);
    }
    if (cols >= max_n) return std::vector<double>(p.data(), p.data() + cols);
    cols = std::min(max_n, 2 * cols);
  }
}

double t_expectation(const FockOperator& rho, double r, Complex alpha) {
  // rho lives on the first dim() levels, so the projected operator suffices.
  return (rho.matrix() * t_operator(r, alpha, rho.dim())).trace().real();
}

PnrSampler::PnrSampler(const FockOperator& rho) {
  if (rho.dim() < 1) throw std::invalid_argument("PnrSampler: empty state");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Eigen::VectorXd& w = es.eigenvalues();
  const double top = w.maxCoeff();
  if (!(top > 0.0)) throw std::domain_error("PnrSampler: state has no positive weight");
  std::vector<int> keep;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] < -1e-9 * std::max(1.0, top)) throw std::domain_error("PnrSampler: state is not PSD");
    if (w[i] > 1e-14 * top) keep.push_back(i);
  }
  factor_.resize(rho.dim(), static_cast<long>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    factor_.col(static_cast<long>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(w[keep[c]]);
  rho_ = factor_ * factor_.adjoint();
  trace_ = rho_.trace().real();
}

PnrSampler PnrSampler::from_factor(Matrix factor) {
  if (factor.rows() < 1 || factor.cols() < 1) throw std::invalid_argument("PnrSampler: empty factor");
  PnrSampler out;
  out.factor_ = std::move(factor);
  out.rho_ = out.factor_ * out.factor_.adjoint();
  out.trace_ = out.rho_.trace().real();
  if (!(out.trace_ > 0.0)) throw std::domain_error("PnrSampler: state has no weight");
  return out;
}

int PnrSampler::sample_n(Complex alpha, int limit, Rng& rng, Vector* column) const {
  const double target = rng.uniform() * trace_;
  const Matrix d = displacement(alpha, dim(), limit);
  double acc = 0.0;
  for (int n = 0; n < limit; ++n) {
    acc += (factor_.adjoint() * d.col(n)).squaredNorm();
    if (acc > target) {
      if (column) *column = d.col(n);
      return n;
    }
  }
  return -1;
}

int PnrSampler::sample_parity(Complex alpha, Rng& rng) const {
  const double expect = displaced_parity(rho_, alpha).real() / trace_;
  const double p_even = std::clamp(0.5 * (1.0 + expect), 0.0, 1.0);
  return rng.uniform() < p_even ? 0 : 1;
}

Complex sample_disk(double alpha_max, Rng& rng) {
  const double rad = alpha_max * std::sqrt(rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  return std::polar(rad, phi);
}

PnrDraw sample_pnr(const PnrSampler& sampler, const TParams& params, int N, Rng& rng,
                   std::size_t count) {
  params.validate();
  if (N < 1) throw std::invalid_argument("sample_pnr: N must be positive");
  if (count == 0) throw std::invalid_argument("sample_pnr: count must be positive");
  PnrDraw out;
  out.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Complex alpha = sample_disk(params.alpha_max, rng);
    const int n = sampler.sample_n(alpha, N, rng);
    if (n < 0)
      ++out.discarded;
    else
      out.samples.push_back({n, alpha});
  }
  return out;
}

PnrDraw sample_pnr(const FockOperator& rho, const TParams& params, int N, Rng& rng,
                   std::size_t count) {
  return sample_pnr(PnrSampler(rho), params, N, rng, count);
}

int pnr_record_cap(int dim, double alpha_max) {
  if (dim < 1 || !(alpha_max > 0.0)) throw std::invalid_argument("pnr_record_cap: bad arguments");
  const double spread = alpha_max + std::sqrt(static_cast<double>(dim)) + 6.0;
  return dim + static_cast<int>(std::ceil(spread * spread));
}

std::vector<PnrSample> sample_pnr_outcomes(const PnrSampler& sampler, const TParams& params,
                                           Rng& rng, std::size_t count) {
  params.validate();
  if (count == 0) throw std::invalid_argument("sample_pnr_outcomes: count must be positive");
  const int cap = pnr_record_cap(sampler.dim(), params.alpha_max);
  std::vector<PnrSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Complex alpha = sample_disk(params.alpha_max, rng);
    const int n = sampler.sample_n(alpha, cap, rng);
    out.push_back({n < 0 ? cap : n, alpha});
  }
  return out;
}

PnrDraw filter_pnr(std::span<const PnrSample> records, int N) {
  if (N < 1) throw std::invalid_argument("filter_pnr: N must be positive");
  PnrDraw out;
  for (const auto& s : records) {
    if (s.n < 0) throw std::invalid_argument("PNR record: negative photon number");
    if (s.n >= N)
      ++out.discarded;
    else
      out.samples.push_back(s);
  }
  return out;
}

std::vector<PnrSample> sample_parity(const FockOperator& rho, double alpha_max, Rng& rng,
                                     std::size_t count) {
  if (!(alpha_max > 0.0)) throw std::invalid_argument("sample_parity: alpha_max must be positive");
  if (count == 0) throw std::invalid_argument("sample_parity: count must be positive");
  const PnrSampler sampler(rho);
  std::vector<PnrSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Complex alpha = sample_disk(alpha_max, rng);
    out.push_back({sampler.sample_parity(alpha, rng), alpha});
  }
  return out;
}

PnrSnapshots::PnrSnapshots(const TParams& params, int N, bool parity_outcomes)
    : params_(params), N_(N), parity_(parity_outcomes) {
  params_.validate();
  if (N < 1) throw std::invalid_argument("PnrSnapshots: N must be positive");
  if (parity_ && params_.r != 0.0)
    throw std::invalid_argument("PnrSnapshots: parity outcomes need r = 0");
}

void PnrSnapshots::add_to(Matrix& sum, const PnrSample& s, double scale) const {
  if (s.n < 0) throw std::invalid_argument("PNR sample: negative photon number");
  if (parity_ ? s.n > 1 : s.n >= N_)
    throw std::out_of_range("PNR sample: photon number outside the estimator cutoff");
  check_alpha(s.alpha);
  const double w = scale * params_.snapshot_weight() * lambda(s.n, params_.r);
  if (params_.r == 0.0) {
    // lambda_0^(n) (2/pi) D(2 alpha) Pi, filled from the upper triangle so the
    // accumulated sum stays exactly Hermitian.
    work_ = displacement(2.0 * s.alpha, N_, N_);
    const double c = w * 2.0 / kPi;
    for (int k = 0; k < N_; ++k) {
      const double ck = (k % 2 == 0) ? c : -c;
      sum(k, k) += ck * work_(k, k).real();
      for (int j = 0; j < k; ++j) {
        const Complex v = ck * work_(j, k);
        sum(j, k) += v;
        sum(k, j) += std::conj(v);
      }
    }
    return;
  }
  work_ = t_operator(-params_.r, s.alpha, N_);
  sum += w * work_;
}

void PnrSnapshots::add_to(Shadow& shadow, const PnrSample& s) const {
  add_to(shadow.mutable_sum(), s);
  shadow.note_added();
}

FockOperator pnr_snapshot(const PnrSample& s, const TParams& params, int N) {
  Matrix m = Matrix::Zero(N, N);
  PnrSnapshots(params, N).add_to(m, s);
  return FockOperator(std::move(m));
}

Shadow pnr_shadow(const PnrDraw& draw, const TParams& params, int N) {
  PnrSnapshots builder(params, N);
  Shadow shadow(N);
  for (const auto& s : draw.samples) builder.add_to(shadow, s);
  shadow.add_empty(draw.discarded);
  return shadow;
}

Shadow parity_shadow(std::span<const PnrSample> samples, double alpha_max, int N) {
  PnrSnapshots builder(TParams{0.0, alpha_max}, N, true);
  Shadow shadow(N);
  for (const auto& s : samples) builder.add_to(shadow, s);
  return shadow;
}

double husimi_q(const FockOperator& rho, Complex alpha) {
  check_alpha(alpha);
  const Vector c = first_column(alpha, rho.dim());
  return (c.adjoint() * rho.matrix() * c)(0, 0).real() / kPi;
}

std::vector<Complex> sample_heterodyne(const FockOperator& rho, double alpha_max, Rng& rng,
                                       std::size_t count) {
  if (!(alpha_max > 0.0)) throw std::invalid_argument("sample_heterodyne: alpha_max must be positive");
  if (count == 0) throw std::invalid_argument("sample_heterodyne: count must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) throw std::domain_error("sample_heterodyne: state has no positive weight");
  std::vector<Complex> out;
  out.reserve(count);
  std::size_t proposals = 0;
  while (out.size() < count) {
    const Complex alpha = sample_disk(alpha_max, rng);
    ++proposals;
    const double q = husimi_q(rho, alpha) * kPi / top;
    if (rng.uniform() < q) out.push_back(alpha);
    if (proposals % 100000 == 0 &&
        static_cast<double>(out.size()) < 1e-4 * static_cast<double>(proposals))
      throw std::domain_error("sample_heterodyne: acceptance rate below 1e-4");
  }
  return out;
}

}  // namespace cvshadow
