#include "cvshadow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace cvshadow {

double psi(int m, double x) {
  if (m < 0) throw std::invalid_argument("psi: negative index");
  std::vector<double> v(m + 1);
  psi_all(x, v);
  return v[m];
}

void psi_all(double x, std::span<double> out) {
  if (out.empty()) return;
  const double sqrt2 = std::sqrt(2.0);
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (out.size() > 1) out[1] = sqrt2 * x * out[0];
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    const double dn = static_cast<double>(n);
    out[n + 1] = (sqrt2 * x * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
  }
}

double QuadratureGrid::default_half_width(int cutoff) { return std::sqrt(2.0 * cutoff) + 5.0; }

QuadratureGrid QuadratureGrid::for_cutoff(int cutoff, int points) {
  if (cutoff < 1) throw std::invalid_argument("QuadratureGrid: cutoff must be >= 1");
  if (points < 16) throw std::invalid_argument("QuadratureGrid: too few grid points");
  return {default_half_width(cutoff), points};
}

namespace {

struct RampNode {
  double k;
  double w;
};

// Composite 20-point Gauss-Legendre rule on [0, k_max]. The integrand
// k <m|D(-ik/sqrt2)|n> e^{ikx} is smooth on the half line; panels are sized
// so that each holds at most ~10 radians of phase at |x| <= x_extent.
std::vector<RampNode> ramp_nodes(int cutoff, double x_extent) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const double k_max = std::sqrt(2.0) * (std::sqrt(static_cast<double>(cutoff)) + 9.0);
  const double omega = std::abs(x_extent) + std::sqrt(2.0 * cutoff) + 2.0;
  const int panels = static_cast<int>(std::ceil(k_max / std::min(1.0, 10.0 / omega)));
  const double h = k_max / panels;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  std::vector<RampNode> nodes;
  nodes.reserve(static_cast<std::size_t>(panels) * 20);
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    const double half = 0.5 * h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      nodes.push_back({mid - half * xs[i], half * ws[i]});
      if (xs[i] != 0.0) nodes.push_back({mid + half * xs[i], half * ws[i]});
    }
  }
  return nodes;
}

// coeff(node, pair) = w k r_mn(k) s_d with <m|D(-ik/sqrt2)|n> = (-i)^d r_mn(k);
// f_mn(x) = sum_nodes coeff * (d even ? cos(kx) : sin(kx)).
RealMatrix ramp_coefficients(int cutoff, const std::vector<RampNode>& nodes) {
  const int pairs = cutoff * (cutoff + 1) / 2;
  RealMatrix coeff(static_cast<Eigen::Index>(nodes.size()), pairs);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double k = nodes[j].k;
    const Matrix d = displacement(Complex(0.0, -k / std::sqrt(2.0)), cutoff, cutoff);
    for (int n = 0; n < cutoff; ++n) {
      for (int m = 0; m <= n; ++m) {
        const int dd = n - m;
        static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const double r = (d(m, n) * kIPow[dd % 4]).real();
        const double sign = (dd % 2 == 0) ? ((dd / 2) % 2 == 0 ? 1.0 : -1.0)
                                          : (((dd - 1) / 2) % 2 == 0 ? 1.0 : -1.0);
        coeff(static_cast<Eigen::Index>(j), PatternEvaluator::pair_index(m, n)) =
            nodes[j].w * k * r * sign;
      }
    }
  }
  return coeff;
}

}  // namespace

PatternEvaluator::PatternEvaluator(int cutoff, int grid_points, double x_max)
    : cutoff_(cutoff), grid_(QuadratureGrid::for_cutoff(cutoff, grid_points)) {
  if (x_max > 0.0) grid_.x_max = x_max;
  const auto nodes = ramp_nodes(cutoff_, grid_.x_max);
  const RealMatrix coeff = ramp_coefficients(cutoff_, nodes);
  const int pairs = pair_count();
  RealMatrix coeff_cos = coeff;
  RealMatrix coeff_sin = coeff;
  for (int n = 0; n < cutoff_; ++n)
    for (int m = 0; m <= n; ++m) {
      if ((n - m) % 2 == 0)
        coeff_sin.col(pair_index(m, n)).setZero();
      else
        coeff_cos.col(pair_index(m, n)).setZero();
    }

  table_.resize(grid_.points, pairs);
  constexpr int kChunk = 256;
  const auto K = static_cast<Eigen::Index>(nodes.size());
  for (int start = 0; start < grid_.points; start += kChunk) {
    const int rows = std::min(kChunk, grid_.points - start);
    RealMatrix c(rows, K), s(rows, K);
    for (int i = 0; i < rows; ++i) {
      const double x = grid_.at(start + i);
      for (Eigen::Index j = 0; j < K; ++j) {
        const double ph = nodes[j].k * x;
        c(i, j) = std::cos(ph);
        s(i, j) = std::sin(ph);
      }
    }
    table_.middleRows(start, rows).noalias() = c * coeff_cos;
    table_.middleRows(start, rows).noalias() += s * coeff_sin;
  }
}

std::vector<double> PatternEvaluator::evaluate_exact(double x) const {
  const auto nodes = ramp_nodes(cutoff_, x);
  const RealMatrix coeff = ramp_coefficients(cutoff_, nodes);
  std::vector<double> out(pair_count(), 0.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double c = std::cos(nodes[j].k * x);
    const double s = std::sin(nodes[j].k * x);
    for (int n = 0; n < cutoff_; ++n)
      for (int m = 0; m <= n; ++m) {
        const int p = pair_index(m, n);
        out[p] += coeff(static_cast<Eigen::Index>(j), p) * ((n - m) % 2 == 0 ? c : s);
      }
  }
  return out;
}

void PatternEvaluator::evaluate(double x, std::span<double> out) const {
  if (static_cast<int>(out.size()) < pair_count())
    throw std::invalid_argument("PatternEvaluator::evaluate: output span too small");
  const double t = (x + grid_.x_max) / grid_.spacing();
  const double fl = std::floor(t);
  if (!(fl >= 0.0) || fl >= grid_.points - 1) {
    const auto exact = evaluate_exact(x);
    std::copy(exact.begin(), exact.end(), out.begin());
    return;
  }
  const auto i = static_cast<Eigen::Index>(fl);
  const double frac = t - fl;
  const double* a = table_.row(i).data();
  const double* b = table_.row(i + 1).data();
  const int P = pair_count();
  for (int p = 0; p < P; ++p) out[p] = a[p] + frac * (b[p] - a[p]);
}

double PatternEvaluator::pattern(int m, int n, double x) const {
  if (m < 0 || n < 0 || m >= cutoff_ || n >= cutoff_)
    throw std::out_of_range("pattern: index outside the cutoff");
  std::vector<double> row(pair_count());
  evaluate(x, row);
  return row[pair_index(m, n)];
}

namespace {

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < kPi)) throw std::invalid_argument("theta must lie in [0, pi)");
}

// psi table (points x dim), row-major per grid node.
RealMatrix psi_table(const QuadratureGrid& grid, int dim) {
  RealMatrix t(grid.points, dim);
  std::vector<double> row(dim);
  for (int i = 0; i < grid.points; ++i) {
    psi_all(grid.at(i), row);
    for (int m = 0; m < dim; ++m) t(i, m) = row[m];
  }
  return t;
}

}  // namespace

QuadratureDensity quadrature_density(const FockOperator& rho, double theta, int grid_points) {
  check_theta(theta);
  if (!rho.is_hermitian(1e-10)) throw std::invalid_argument("quadrature_density: non-Hermitian input");
  const int D = rho.dim();
  QuadratureDensity out;
  out.theta = theta;
  out.grid = QuadratureGrid::for_cutoff(D, grid_points);
  const RealMatrix psi_t = psi_table(out.grid, D);
  Vector phase(D);
  for (int m = 0; m < D; ++m) phase(m) = std::polar(1.0, -m * theta);
  // <x_theta|rho|x_theta> = sum_mn rho_mn e^{-i(m-n)theta} psi_m psi_n
  const Matrix rotated = phase.asDiagonal() * rho.matrix() * phase.conjugate().asDiagonal();
  out.values.resize(out.grid.points);
  for (int i = 0; i < out.grid.points; ++i) {
    const Eigen::VectorXd p = psi_t.row(i).transpose();
    const Complex v = p.cast<Complex>().dot(rotated * p.cast<Complex>());
    if (std::abs(v.imag()) > 1e-10) throw std::logic_error("quadrature_density: complex density");
    double re = v.real();
    if (re < 0.0) {
      if (re < -1e-9) throw std::domain_error("quadrature_density: negative density (state not PSD)");
      re = 0.0;
    }
    out.values[i] = re;
  }
  out.cdf.resize(out.grid.points);
  const double h = out.grid.spacing();
  out.cdf[0] = 0.0;
  for (int i = 1; i < out.grid.points; ++i)
    out.cdf[i] = out.cdf[i - 1] + 0.5 * h * (out.values[i - 1] + out.values[i]);
  if (std::abs(out.total() - rho.trace()) > 1e-6)
    throw std::logic_error("quadrature_density: grid does not capture the trace");
  return out;
}

double sample_quadrature(const QuadratureDensity& density, Rng& rng) {
  if (!(density.total() > 0.0)) throw std::domain_error("sample_quadrature: degenerate density");
  const double target = rng.uniform() * density.total();
  return detail::invert_cdf(density.grid, target, [&](int i) { return density.cdf[i]; });
}

QuadratureSampler::QuadratureSampler(const FockOperator& rho, int grid_points)
    : dim_(rho.dim()), grid_(QuadratureGrid::for_cutoff(rho.dim(), grid_points)) {
  if (!rho.is_hermitian(1e-10)) throw std::invalid_argument("QuadratureSampler: non-Hermitian input");
  const RealMatrix psi_t = psi_table(grid_, dim_);
  const Matrix& r = rho.matrix();
  components_.resize(grid_.points, dim_);
  std::vector<Complex> g(dim_);
  std::vector<Complex> acc(dim_, 0.0);
  std::vector<Complex> prev(dim_, 0.0);
  const double h = grid_.spacing();
  for (int i = 0; i < grid_.points; ++i) {
    // g_d(x) = sum_{m - n = d} rho_mn psi_m psi_n, d >= 0
    for (int d = 0; d < dim_; ++d) {
      Complex s = 0.0;
      for (int n = 0; n + d < dim_; ++n) s += r(n + d, n) * (psi_t(i, n + d) * psi_t(i, n));
      g[d] = s;
    }
    for (int d = 0; d < dim_; ++d) {
      if (i > 0) acc[d] += 0.5 * h * (prev[d] + g[d]);
      components_(i, d) = acc[d];
      prev[d] = g[d];
    }
  }
}

double QuadratureSampler::cdf_at(int i, std::span<const Complex> phase) const {
  const Complex* row = components_.row(i).data();
  double c = row[0].real();
  for (int d = 1; d < dim_; ++d) c += 2.0 * (phase[d] * row[d]).real();
  return c;
}

double QuadratureSampler::sample_x(double theta, Rng& rng) const {
  std::vector<Complex> phase(dim_);
  const Complex step = std::polar(1.0, -theta);
  phase[0] = 1.0;
  for (int d = 1; d < dim_; ++d) phase[d] = phase[d - 1] * step;
  const double total = cdf_at(grid_.points - 1, phase);
  if (!(total > 0.0)) throw std::domain_error("QuadratureSampler: degenerate density");
  const double target = rng.uniform() * total;
  return detail::invert_cdf(grid_, target, [&](int i) { return cdf_at(i, phase); });
}

ConditionalQuadratureSampler::ConditionalQuadratureSampler(int dim, int grid_points)
    : dim_(dim), grid_(QuadratureGrid::for_cutoff(dim, grid_points)) {
  const RealMatrix psi_t = psi_table(grid_, dim_);
  const int pairs = dim_ * (dim_ + 1) / 2;
  cumulative_.resize(grid_.points, pairs);
  cumulative_.row(0).setZero();
  const double h = grid_.spacing();
  for (int i = 1; i < grid_.points; ++i)
    for (int n = 0; n < dim_; ++n)
      for (int m = 0; m <= n; ++m) {
        const int p = PatternEvaluator::pair_index(m, n);
        cumulative_(i, p) = cumulative_(i - 1, p) +
                            0.5 * h * (psi_t(i - 1, m) * psi_t(i - 1, n) + psi_t(i, m) * psi_t(i, n));
      }
}

double ConditionalQuadratureSampler::sample_x(const Matrix& rho, double theta, Rng& rng) const {
  if (rho.rows() != dim_ || rho.cols() != dim_)
    throw std::invalid_argument("ConditionalQuadratureSampler: dimension mismatch");
  const int pairs = dim_ * (dim_ + 1) / 2;
  std::vector<double> a(pairs);
  for (int n = 0; n < dim_; ++n)
    for (int m = 0; m <= n; ++m) {
      const Complex c = rho(m, n) * std::polar(1.0, -(m - n) * theta);
      a[PatternEvaluator::pair_index(m, n)] = (m == n) ? c.real() : 2.0 * c.real();
    }
  auto cdf = [&](int i) {
    const double* row = cumulative_.row(i).data();
    double s = 0.0;
    for (int p = 0; p < pairs; ++p) s += a[p] * row[p];
    return s;
  };
  const double total = cdf(grid_.points - 1);
  if (!(total > 0.0)) throw std::domain_error("ConditionalQuadratureSampler: degenerate density");
  return detail::invert_cdf(grid_, rng.uniform() * total, cdf);
}

}  // namespace cvshadow
