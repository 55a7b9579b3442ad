#pragma once

#include <string>
#include <vector>

#include "cvshadow/displaced.hpp"
#include "cvshadow/fock.hpp"

namespace cvshadow {

/// Inputs of the generic matrix-Bernstein sample bound. All logarithms in
/// this header are natural, and every T is returned unrounded.
struct BoundInputs {
  double epsilon = 0.1;
  double delta = 0.1;
  int N = 1;
  double nu_sq = 0.0;  // variance shadow norm
  double R = 0.0;      // range shadow norm

  void validate() const;
};

/// Placeholder constants of the homodyne bound. They come from the pattern
/// function literature without numeric values; all default to 1.
struct HomodyneConstants {
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;
};

struct ShadowNorms {
  double nu_sq = 0.0;
  double R = 0.0;
};

/// 2 N^2 (nu^2 + R eps / 2N) / eps^2 (ln 2N + ln 1/delta)
double lemma1_T(const BoundInputs& in);

/// 2 N^5 C2 C3 / eps^2 (ln 1/delta + ln 2N)
double homodyne_T(double epsilon, double delta, int N, double C2 = 1.0, double C3 = 1.0);

/// Analytic norm bounds for PNR snapshots A lambda_r^(n) T_{-r}; A is the
/// snapshot prefactor (TParams::snapshot_weight() for this library's estimator).
ShadowNorms pnr_norms(int N, double r, double A);

/// r = 0: N^2 A^2 / eps^2 (ln 2N + ln 1/delta).
/// r != 0: 32 N^4 / (pi^4 eps^2 (1 - r^2)^2) ((1 + |r|)/(1 - |r|))^{2N} ln(2N/delta).
double pnr_T(double epsilon, double delta, int N, double r, double A);

/// 2 N^{2M} (nu1^{2M} sum|c| + R eps / 2N) / eps^2 (ln 2N + ln 1/delta).
/// Pass k instead of M for k-local reduced states.
double multimode_T(double epsilon, double delta, int N, int modes, double nu1_sq,
                   double sum_abs_c, double R);

/// Numerically integrated shadow norms of the truncated snapshots under the
/// exact outcome distribution of rho, and the largest deviation from the mean
/// seen on the integration grid.
struct EmpiricalNorms {
  double nu_sq = 0.0;
  double R_observed = 0.0;
  double residual = 0.0;  // resolution check, see below
};

/// theta on a uniform periodic grid, x on the trapezoid grid of
/// quadrature_density. residual = ||E F - rho^(N)||_inf; throws
/// std::domain_error above 1e-3.
EmpiricalNorms empirical_norms_homodyne(const FockOperator& rho, int N, int theta_points = 64,
                                        int x_points = 2048);

/// Radial 10-point Gauss-Legendre panels x uniform angles over the disk.
/// residual is the relative change of nu^2 against a grid with half the
/// panels and half the angles; throws std::domain_error above 1e-3.
EmpiricalNorms empirical_norms_pnr(const FockOperator& rho, const TParams& params, int N,
                                   int radial_panels = 6, int angular_points = 96);

struct BoundRow {
  std::string protocol;
  int N = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double T_bound = 0.0;
};

/// homodyne_T and pnr_T (r, with A = snapshot weight of the default disk
/// alpha_max^2 = 4N) for each N.
std::vector<BoundRow> bound_table(const std::vector<int>& Ns, double epsilon, double delta,
                                  const HomodyneConstants& c = {}, double r = 0.0);

}  // namespace cvshadow
