#include "cvshadow/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "cvshadow/homodyne.hpp"
#include "cvshadow/quadrature.hpp"

namespace cvshadow {

namespace {

void check_accuracy(double epsilon, double delta, int N) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("bounds: epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bounds: delta must lie in (0, 1)");
  if (N < 1) throw std::invalid_argument("bounds: N must be positive");
}

void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(what);
}

double log_term(double delta, int N) { return std::log(2.0 * N) + std::log(1.0 / delta); }

// ((1 + |r|)/(1 - |r|))^{2N} / (1 - r^2)^2
double pnr_growth(int N, double r) {
  if (!(std::abs(r) < 1.0)) throw std::invalid_argument("bounds: |r| must be below 1");
  const double a = std::abs(r);
  return std::pow((1.0 + a) / (1.0 - a), 2.0 * N) / ((1.0 - a * a) * (1.0 - a * a));
}

}  // namespace

void BoundInputs::validate() const {
  check_accuracy(epsilon, delta, N);
  check_nonnegative(nu_sq, "bounds: nu^2 must be non-negative");
  check_nonnegative(R, "bounds: R must be non-negative");
}

double lemma1_T(const BoundInputs& in) {
  in.validate();
  const double N = in.N;
  return 2.0 * N * N * (in.nu_sq + in.R * in.epsilon / (2.0 * N)) / (in.epsilon * in.epsilon) *
         log_term(in.delta, in.N);
}

double homodyne_T(double epsilon, double delta, int N, double C2, double C3) {
  check_accuracy(epsilon, delta, N);
  if (!(C2 > 0.0) || !(C3 > 0.0)) throw std::invalid_argument("homodyne_T: C2 and C3 must be positive");
  return 2.0 * std::pow(N, 5) * C2 * C3 / (epsilon * epsilon) * log_term(delta, N);
}

ShadowNorms pnr_norms(int N, double r, double A) {
  if (N < 1) throw std::invalid_argument("pnr_norms: N must be positive");
  check_nonnegative(A, "pnr_norms: A must be non-negative");
  const double a = std::abs(r);
  const double growth = pnr_growth(N, r);
  ShadowNorms out;
  out.nu_sq = 16.0 * A * A / std::pow(kPi, 4) * growth;
  // A |lambda_{|r|}^(0) lambda_{-|r|}^(N)| + A
  out.R = A * 4.0 / (kPi * kPi * (1.0 - a * a)) * std::pow((1.0 + a) / (1.0 - a), N) + A;
  return out;
}

double pnr_T(double epsilon, double delta, int N, double r, double A) {
  check_accuracy(epsilon, delta, N);
  check_nonnegative(A, "pnr_T: A must be non-negative");
  if (!(std::abs(r) < 1.0)) throw std::invalid_argument("pnr_T: |r| must be below 1");
  const double n = N;
  if (r == 0.0) return n * n * A * A / (epsilon * epsilon) * log_term(delta, N);
  return 32.0 * std::pow(n, 4) / (std::pow(kPi, 4) * epsilon * epsilon) * pnr_growth(N, r) *
         std::log(2.0 * n / delta);
}

double multimode_T(double epsilon, double delta, int N, int modes, double nu1_sq, double sum_abs_c,
                   double R) {
  check_accuracy(epsilon, delta, N);
  if (modes < 1) throw std::invalid_argument("multimode_T: mode count must be positive");
  check_nonnegative(nu1_sq, "multimode_T: nu1^2 must be non-negative");
  check_nonnegative(sum_abs_c, "multimode_T: sum |c| must be non-negative");
  check_nonnegative(R, "multimode_T: R must be non-negative");
  const double n = N;
  return 2.0 * std::pow(n, 2.0 * modes) *
         (std::pow(nu1_sq, modes) * sum_abs_c + R * epsilon / (2.0 * n)) / (epsilon * epsilon) *
         log_term(delta, N);
}

EmpiricalNorms empirical_norms_homodyne(const FockOperator& rho, int N, int theta_points,
                                        int x_points) {
  if (N < 1 || N > rho.dim() || N > 8) throw std::invalid_argument("empirical_norms: N must be in [1, min(dim, 8)]");
  if (theta_points < 2 * (N + rho.dim())) throw std::invalid_argument("empirical_norms: too few phases");
  if (x_points < 64) throw std::invalid_argument("empirical_norms: too few quadrature points");
  const PatternEvaluator evaluator(N);
  const HomodyneSnapshots builder(evaluator, N);

  // After the x integral the integrand is a pi-periodic trigonometric
  // polynomial of degree < N + dim, so equal phase weights are exact.
  Matrix mean = Matrix::Zero(N, N);
  Matrix second = Matrix::Zero(N, N);
  double R_observed = 0.0;
  const Matrix target = project(rho, N).matrix();
  for (int t = 0; t < theta_points; ++t) {
    const double theta = kPi * t / theta_points;
    const auto density = quadrature_density(rho, theta, x_points);
    const double h = density.grid.spacing();
    for (int i = 0; i < density.grid.points; ++i) {
      const double w = density.values[i] * h * ((i == 0 || i + 1 == density.grid.points) ? 0.5 : 1.0) /
                       theta_points;
      Matrix f = Matrix::Zero(N, N);
      builder.add_to(f, {theta, density.grid.at(i)});
      mean += w * f;
      second += w * f * f;
      if (density.values[i] > 0.0) R_observed = std::max(R_observed, infinity_norm(f - target));
    }
  }
  EmpiricalNorms out;
  out.nu_sq = infinity_norm(0.5 * (second + second.adjoint()));
  out.R_observed = R_observed;
  out.residual = infinity_norm(mean - target);
  if (out.residual > 1e-3)
    throw std::domain_error("empirical_norms: integration residual above 1e-3, increase the resolution");
  return out;
}

namespace {

struct PnrMoments {
  Matrix mean;
  Matrix second;
  std::vector<Matrix> snapshots;  // kept only when requested
};

PnrMoments pnr_moments(const FockOperator& rho, const TParams& params, int N, int panels,
                       int angular, bool keep) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  const PnrSnapshots builder(params, N);
  const double amax = params.alpha_max;
  PnrMoments out{Matrix::Zero(N, N), Matrix::Zero(N, N), {}};
  // the rule is stored for the non-negative half
  std::vector<std::pair<double, double>> rule;
  for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
    rule.emplace_back(GL::abscissa()[i], GL::weights()[i]);
    if (GL::abscissa()[i] != 0.0) rule.emplace_back(-GL::abscissa()[i], GL::weights()[i]);
  }
  const int D = rho.dim();
  const double h = amax / panels;
  for (int panel = 0; panel < panels; ++panel) {
    for (const auto& [u, wu] : rule) {
      const double rad = h * (panel + 0.5 * (u + 1.0));
      // d^2 alpha / area = rad drad dphi / (pi amax^2)
      const double w = wu * 0.5 * h * rad / (kPi * amax * amax) * 2.0 * kPi / angular;
      for (int k = 0; k < angular; ++k) {
        const Complex alpha = std::polar(rad, 2.0 * kPi * k / angular);
        const Matrix d = displacement(alpha, D, N);
        const Eigen::VectorXd p = (d.adjoint() * rho.matrix() * d).diagonal().real().cwiseMax(0.0);
        for (int n = 0; n < N; ++n) {
          Matrix f = Matrix::Zero(N, N);
          builder.add_to(f, {n, alpha});
          out.mean += w * p[n] * f;
          out.second += w * p[n] * f * f;
          if (keep && p[n] > 0.0) out.snapshots.push_back(std::move(f));
        }
      }
    }
  }
  return out;
}

}  // namespace

EmpiricalNorms empirical_norms_pnr(const FockOperator& rho, const TParams& params, int N,
                                   int radial_panels, int angular_points) {
  params.validate();
  if (N < 1 || N > 8) throw std::invalid_argument("empirical_norms: N must be in [1, 8]");
  if (radial_panels < 2) throw std::invalid_argument("empirical_norms: need at least 2 radial panels");
  if (angular_points < 8) throw std::invalid_argument("empirical_norms: too few angles");
  const PnrMoments fine = pnr_moments(rho, params, N, radial_panels, angular_points, true);
  const PnrMoments coarse = pnr_moments(rho, params, N, radial_panels / 2, angular_points / 2, false);
  EmpiricalNorms out;
  out.nu_sq = infinity_norm(0.5 * (fine.second + fine.second.adjoint()));
  const double nu_coarse = infinity_norm(0.5 * (coarse.second + coarse.second.adjoint()));
  for (const auto& f : fine.snapshots) out.R_observed = std::max(out.R_observed, infinity_norm(f - fine.mean));
  out.residual = std::abs(out.nu_sq - nu_coarse) / std::max(out.nu_sq, 1e-300);
  if (out.residual > 1e-3)
    throw std::domain_error("empirical_norms: resolution check failed, the disk integral is not converged");
  return out;
}

std::vector<BoundRow> bound_table(const std::vector<int>& Ns, double epsilon, double delta,
                                  const HomodyneConstants& c, double r) {
  std::vector<BoundRow> rows;
  for (int N : Ns) {
    rows.push_back({"homodyne", N, epsilon, delta, homodyne_T(epsilon, delta, N, c.C2, c.C3)});
    const double A = TParams::with_default_region(N, r).snapshot_weight();
    rows.push_back({"pnr", N, epsilon, delta, pnr_T(epsilon, delta, N, r, A)});
  }
  return rows;
}

}  // namespace cvshadow
