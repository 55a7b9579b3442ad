#pragma once

#include <span>
#include <vector>

#include "cvshadow/fock.hpp"
#include "cvshadow/rng.hpp"
#include "cvshadow/types.hpp"

namespace cvshadow {

// Quadrature convention: X_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2),
// so the vacuum has variance 1/2 and psi_0(x) = pi^{-1/4} exp(-x^2/2).
// Quadrature eigenstates carry <x_theta|m> = e^{-i m theta} psi_m(x); densities
// therefore pick up e^{-i(m-n)theta} and snapshots e^{+i(m-n)theta}.

/// Normalized oscillator eigenfunction psi_m(x).
double psi(int m, double x);

/// psi_0(x) ... psi_{out.size()-1}(x) by the three-term recurrence.
void psi_all(double x, std::span<double> out);

/// Uniform grid on [-x_max, x_max].
struct QuadratureGrid {
  double x_max = 0.0;
  int points = 0;

  double spacing() const { return 2.0 * x_max / (points - 1); }
  double at(int i) const { return -x_max + spacing() * i; }

  /// Half-width sqrt(2 N) + 5: turning point of |N-1> plus tail margin.
  static double default_half_width(int cutoff);
  static QuadratureGrid for_cutoff(int cutoff, int points = 4096);
};

/// Pattern functions f_mn(x) for 0 <= m, n < cutoff.
///
/// The table is built from the ramp-filter representation
///   f_mn(x) = Re int_0^inf dk k e^{ikx} <m|D(-ik/sqrt 2)|n>,
/// i.e. the k-space form of d/dx(psi_m phi_n), integrated with composite
/// Gauss-Legendre panels. Lookups inside the grid use linear
/// interpolation; points outside it are evaluated directly.
class PatternEvaluator {
 public:
  explicit PatternEvaluator(int cutoff, int grid_points = 4096, double x_max = 0.0);

  int cutoff() const { return cutoff_; }
  const QuadratureGrid& grid() const { return grid_; }
  int pair_count() const { return cutoff_ * (cutoff_ + 1) / 2; }

  /// Packed index of the unordered pair {m, n}.
  static int pair_index(int m, int n) { return m <= n ? n * (n + 1) / 2 + m : m * (m + 1) / 2 + n; }

  double pattern(int m, int n, double x) const;

  /// All f_mn(x), packed by pair_index. `out` must hold pair_count() values.
  void evaluate(double x, std::span<double> out) const;

  /// Direct quadrature at x, no table.
  std::vector<double> evaluate_exact(double x) const;

  /// Tabulated value at grid node i.
  double table(int m, int n, int i) const { return table_(i, pair_index(m, n)); }

 private:
  int cutoff_;
  QuadratureGrid grid_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> table_;
};

/// Homodyne outcome density <x_theta|rho|x_theta> on a grid, with its
/// trapezoid cumulative table.
struct QuadratureDensity {
  double theta = 0.0;
  QuadratureGrid grid;
  std::vector<double> values;
  std::vector<double> cdf;

  double total() const { return cdf.empty() ? 0.0 : cdf.back(); }
};

/// Requires Hermitian rho and theta in [0, pi). Round-off negativity down
/// to -1e-9 is clipped; anything more negative is rejected.
QuadratureDensity quadrature_density(const FockOperator& rho, double theta, int grid_points = 4096);

/// Inverse-CDF draw with linear interpolation inside a grid cell.
double sample_quadrature(const QuadratureDensity& density, Rng& rng);

/// Fixed-state homodyne sampler.
///
/// Precomputes the cumulative Fourier components G_d(x) of the density in
/// theta, so that the CDF at any theta costs O(dim) per grid node and a
/// draw costs O(dim log points). Draws agree with
/// sample_quadrature(quadrature_density(rho, theta)) up to round-off.
class QuadratureSampler {
 public:
  explicit QuadratureSampler(const FockOperator& rho, int grid_points = 4096);

  const QuadratureGrid& grid() const { return grid_; }
  double sample_x(double theta, Rng& rng) const;

 private:
  double cdf_at(int i, std::span<const Complex> phase) const;

  int dim_;
  QuadratureGrid grid_;
  Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> components_;
};

/// Quadrature sampler for states that change on every draw (conditional
/// states in joint multimode sampling). Holds cumulative tables of
/// psi_m psi_n for a fixed dimension.
class ConditionalQuadratureSampler {
 public:
  explicit ConditionalQuadratureSampler(int dim, int grid_points = 4096);

  int dim() const { return dim_; }
  const QuadratureGrid& grid() const { return grid_; }
  double sample_x(const Matrix& rho, double theta, Rng& rng) const;

 private:
  int dim_;
  QuadratureGrid grid_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cumulative_;
};

namespace detail {
/// Locate u in a non-decreasing cumulative table evaluated lazily by `cdf`.
template <typename Cdf>
double invert_cdf(const QuadratureGrid& grid, double target, Cdf&& cdf) {
  int lo = 0;
  int hi = grid.points - 1;
  double c_lo = cdf(lo);
  double c_hi = cdf(hi);
  if (target <= c_lo) return grid.at(0);
  if (target >= c_hi) return grid.at(hi);
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    const double c = cdf(mid);
    if (c <= target) {
      lo = mid;
      c_lo = c;
    } else {
      hi = mid;
      c_hi = c;
    }
  }
  const double width = c_hi - c_lo;
  const double frac = width > 0.0 ? (target - c_lo) / width : 0.0;
  return grid.at(lo) + frac * grid.spacing();
}
}  // namespace detail

}  // namespace cvshadow
