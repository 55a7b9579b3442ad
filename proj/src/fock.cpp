#include "cvshadow/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cvshadow/rng.hpp"

namespace cvshadow {

FockOperator::FockOperator(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("FockOperator: matrix is not square");
  if (m_.rows() == 0) throw std::invalid_argument("FockOperator: empty matrix");
  if (!m_.allFinite()) throw std::invalid_argument("FockOperator: non-finite entries");
}

FockOperator FockOperator::zero(int dim) { return FockOperator(Matrix::Zero(dim, dim)); }

FockOperator FockOperator::identity(int dim) { return FockOperator(Matrix::Identity(dim, dim)); }

bool FockOperator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double FockOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

// alpha^n / sqrt(n!) * scale, accumulated without factorials.
Vector poisson_amplitudes(Complex alpha, int cutoff, double scale) {
  Vector c(cutoff);
  Complex v = scale;
  for (int n = 0; n < cutoff; ++n) {
    c(n) = v;
    v *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return c;
}

}  // namespace

int suggested_cutoff(Complex alpha, double tail) {
  const double mean = std::norm(alpha);
  double p = std::exp(-mean);
  double mass = p;
  int n = 0;
  while (1.0 - mass > tail && n < 4096) {
    ++n;
    p *= mean / n;
    mass += p;
    if (p < tail * 1e-3 && static_cast<double>(n) > mean) break;
  }
  return std::max(n + 2, 1);
}

Vector state_vector(const StateSpec& spec) {
  const int N = spec.cutoff;
  if (N < 1) throw std::invalid_argument("state cutoff must be >= 1");
  return std::visit(
      [N](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        Vector v = Vector::Zero(N);
        if constexpr (std::is_same_v<T, states::Vacuum>) {
          v(0) = 1.0;
        } else if constexpr (std::is_same_v<T, states::Fock>) {
          if (s.n < 0) throw std::invalid_argument("Fock state index must be >= 0");
          if (s.n < N) v(s.n) = 1.0;
        } else if constexpr (std::is_same_v<T, states::Coherent>) {
          v = poisson_amplitudes(s.alpha, N, std::exp(-0.5 * std::norm(s.alpha)));
        } else if constexpr (std::is_same_v<T, states::Cat>) {
          // |alpha> +/- |-alpha> keeps only even (odd) n; the norm is
          // cosh(|alpha|^2) or sinh(|alpha|^2) in the unnormalized basis.
          const double x = std::norm(s.alpha);
          if (x == 0.0 && s.odd) throw std::invalid_argument("odd cat state needs alpha != 0");
          const double e2 = std::exp(-2.0 * x);
          const double norm2 = s.odd ? (1.0 - e2) / 2.0 : (1.0 + e2) / 2.0;
          v = poisson_amplitudes(s.alpha, N, std::exp(-0.5 * x) / std::sqrt(norm2));
          for (int n = s.odd ? 0 : 1; n < N; n += 2) v(n) = 0.0;
        } else if constexpr (std::is_same_v<T, states::RandomPure>) {
          Rng rng(s.seed);
          for (int n = 0; n < N; ++n) v(n) = Complex(rng.normal(), rng.normal());
          v.normalize();
        } else {
          throw std::invalid_argument("custom states have no state vector");
        }
        return v;
      },
      spec.variant);
}

FockOperator make_state(const StateSpec& spec) {
  if (const auto* custom = std::get_if<states::Custom>(&spec.variant)) {
    const Matrix& m = custom->entries;
    if (m.rows() != m.cols()) throw std::invalid_argument("custom state: matrix is not square");
    FockOperator op(m);
    if (!op.is_hermitian(1e-12)) throw std::invalid_argument("custom state: not Hermitian");
    const Matrix sym = 0.5 * (m + m.adjoint());
    FockOperator herm(sym);
    if (herm.min_eigenvalue() < -1e-10)
      throw std::invalid_argument("custom state: negative eigenvalue below -1e-10");
    if (herm.trace() > 1.0 + 1e-10) throw std::invalid_argument("custom state: trace exceeds 1");
    if (herm.dim() > spec.cutoff) return project(herm, spec.cutoff);
    if (herm.dim() < spec.cutoff) {
      Matrix padded = Matrix::Zero(spec.cutoff, spec.cutoff);
      padded.topLeftCorner(herm.dim(), herm.dim()) = herm.matrix();
      return FockOperator(std::move(padded));
    }
    return herm;
  }
  const Vector v = state_vector(spec);
  return FockOperator(v * v.adjoint());
}

FockOperator project(const FockOperator& op, int N) {
  if (N <= 0) throw std::invalid_argument("project: N must be positive");
  if (N > op.dim()) throw std::invalid_argument("project: N exceeds operator dimension");
  return FockOperator(op.matrix().topLeftCorner(N, N));
}

double infinity_norm(const Matrix& op) {
  if (!op.allFinite()) throw std::invalid_argument("infinity_norm: non-finite entries");
  if (op.size() == 0) return 0.0;
  if (op.rows() == op.cols() && (op - op.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + op.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(op.rows() - 1)));
  }
  Eigen::JacobiSVD<Matrix> svd(op);
  return svd.singularValues()(0);
}

double trace_norm(const Matrix& op) {
  Eigen::JacobiSVD<Matrix> svd(op);
  return svd.singularValues().sum();
}

FockOperator tensor(const FockOperator& a, const FockOperator& b) {
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return FockOperator(std::move(out));
}

FockOperator tensor(std::span<const FockOperator> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor: no factors");
  FockOperator out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

FockOperator partial_trace(const FockOperator& op, std::span<const int> keep,
                           std::span<const int> dims) {
  const int M = static_cast<int>(dims.size());
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("partial_trace: non-positive mode dimension");
    total *= d;
  }
  if (total != op.dim()) throw std::invalid_argument("partial_trace: dims do not match operator");
  std::vector<bool> kept(M, false);
  int prev = -1;
  for (int k : keep) {
    if (k < 0 || k >= M) throw std::invalid_argument("partial_trace: mode index out of range");
    if (k <= prev) throw std::invalid_argument("partial_trace: keep must be strictly increasing");
    kept[k] = true;
    prev = k;
  }
  long keep_dim = 1;
  for (int k : keep) keep_dim *= dims[k];
  const long trace_dim = total / keep_dim;

  // full_index[t * keep_dim + k] = flat index with traced digits t and kept digits k
  std::vector<long> full_index(total);
  std::vector<int> digit(M, 0);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int m = M - 1; m >= 0; --m) {
      digit[m] = static_cast<int>(rem % dims[m]);
      rem /= dims[m];
    }
    long k = 0, t = 0;
    for (int m = 0; m < M; ++m) {
      if (kept[m])
        k = k * dims[m] + digit[m];
      else
        t = t * dims[m] + digit[m];
    }
    full_index[t * keep_dim + k] = flat;
  }
  const Matrix& a = op.matrix();
  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (long t = 0; t < trace_dim; ++t) {
    const long* row = &full_index[t * keep_dim];
    for (long j = 0; j < keep_dim; ++j)
      for (long i = 0; i < keep_dim; ++i) out(i, j) += a(row[i], row[j]);
  }
  return FockOperator(std::move(out));
}

Matrix displacement(Complex beta, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("displacement: empty shape");
  // Along each diagonal j - k = a >= 0 the elements are
  //   <k+a|D|k> = e^{i a arg beta} g_k,  g_k = sqrt(k!/(k+a)!) |beta|^a e^{-x/2} L_k^(a)(x),
  // with x = |beta|^2; above the diagonal beta is replaced by -conj(beta).
  // The Laguerre three-term recurrence in normalized form stays stable where
  // the column recurrence of D loses digits (|beta|^2 well above the cutoff).
  Matrix d(rows, cols);
  const double x = std::norm(beta);
  const double lb = std::log(std::abs(beta));
  for (int side = 0; side < 2; ++side) {
    const Complex base = side == 0 ? beta : -std::conj(beta);
    const int long_dim = side == 0 ? rows : cols;
    const int short_dim = side == 0 ? cols : rows;
    for (int a = side; a < long_dim; ++a) {
      const int len = std::min(short_dim, long_dim - a);
      if (len <= 0) break;
      const Complex phase = std::polar(1.0, a * std::arg(base));
      double g_prev = 0.0;
      double g = a == 0 ? std::exp(-0.5 * x)
                        : (x > 0.0 ? std::exp(a * lb - 0.5 * x - 0.5 * std::lgamma(a + 1.0)) : 0.0);
      for (int k = 0; k < len; ++k) {
        if (side == 0)
          d(k + a, k) = phase * g;
        else
          d(k, k + a) = phase * g;
        const double next = ((2.0 * k + 1.0 + a - x) * g - std::sqrt(double(k) * (k + a)) * g_prev) /
                            std::sqrt((k + 1.0) * (k + 1.0 + a));
        g_prev = g;
        g = next;
      }
    }
  }
  return d;
}

Complex displaced_parity(const Matrix& op, Complex alpha) {
  const int N = static_cast<int>(op.rows());
  const Matrix d = displacement(2.0 * alpha, N, N);
  Complex acc = 0.0;
  for (int k = 0; k < N; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    Complex col = 0.0;
    for (int j = 0; j < N; ++j) col += op(k, j) * d(j, k);
    acc += sign * col;
  }
  return acc;
}

WignerGridSpec WignerGridSpec::covering(int cutoff, int points) {
  const double h = std::sqrt(2.0 * cutoff) + 3.0;
  return {-h, h, points, -h, h, points};
}

double WignerGrid::cell_sum() const {
  if (q.size() < 2 || p.size() < 2) return 0.0;
  const double dq = q[1] - q[0];
  const double dp = p[1] - p[0];
  return values.sum() * dq * dp;
}

double wigner_value(const FockOperator& op, double q, double p) {
  const Complex alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
  return displaced_parity(op.matrix(), alpha).real() / kPi;
}

WignerGrid wigner(const FockOperator& op, const WignerGridSpec& spec) {
  if (spec.q_points < 2 || spec.p_points < 2)
    throw std::invalid_argument("wigner: grid needs at least 2 points per axis");
  WignerGrid g;
  g.q.resize(spec.q_points);
  g.p.resize(spec.p_points);
  for (int i = 0; i < spec.q_points; ++i)
    g.q[i] = spec.q_min + (spec.q_max - spec.q_min) * i / (spec.q_points - 1);
  for (int j = 0; j < spec.p_points; ++j)
    g.p[j] = spec.p_min + (spec.p_max - spec.p_min) * j / (spec.p_points - 1);
  g.values.resize(spec.q_points, spec.p_points);
  for (int i = 0; i < spec.q_points; ++i)
    for (int j = 0; j < spec.p_points; ++j) g.values(i, j) = wigner_value(op, g.q[i], g.p[j]);
  return g;
}

}  // namespace cvshadow
