#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvshadow/fock.hpp"
#include "cvshadow/rng.hpp"
#include "cvshadow/shadow.hpp"

namespace cvshadow {

/// T-operator family parameter and the sampled phase-space disk.
///
/// The disk |alpha| <= alpha_max has d^2 alpha measure
/// area() = pi alpha_max^2. With the eigenvalues lambda_r^(n) below,
///   rho = pi * int d^2 alpha sum_n <n,alpha|rho|n,alpha> lambda_r^(n) T_{-r}(alpha),
/// so a draw with alpha uniform on the disk carries the prefactor
/// snapshot_weight() = pi * area().
struct TParams {
  double r = 0.0;
  double alpha_max = 1.0;

  double area() const { return kPi * alpha_max * alpha_max; }
  double snapshot_weight() const { return kPi * area(); }
  void validate() const;

  /// alpha_max^2 = 4 N, i.e. area 4 pi N.
  static TParams with_default_region(int N, double r = 0.0);
};

struct PnrSample {
  int n = 0;
  Complex alpha;
};

/// Kept samples plus the number of draws with n >= N. Discarded draws
/// count towards the shadow size with a zero snapshot.
struct PnrDraw {
  std::vector<PnrSample> samples;
  std::size_t discarded = 0;

  std::size_t total() const { return samples.size() + discarded; }
  double discard_fraction() const {
    return total() == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(total());
  }
};

/// Eigenvalue lambda_r^(n) = 2 (-1)^n (1-r)^n / (pi (1+r)^{n+1}).
double lambda(int n, double r);

/// <j|D(alpha)|m>.
Complex displaced_overlap(int j, Complex alpha, int m);

/// P_N T_r(alpha) P_N in closed form. T_r(alpha) = 2/(pi(1+r)) D(alpha) s^{a^dag a} D(alpha)^dag
/// with s = -(1-r)/(1+r); its normal-ordered form gives a finite sum per entry.
Matrix t_operator(double r, Complex alpha, int N);

/// Same operator by the eigen-expansion sum_m lambda_r^(m) |alpha,m><alpha,m|,
/// truncated once the remaining terms are below `tol`. Accurate for r >= 0;
/// for r < 0 the weights grow geometrically and the sum cancels badly.
Matrix t_operator_series(double r, Complex alpha, int N, double tol = 1e-14);

/// p_n = <n,alpha|rho|n,alpha> for n = 0, 1, ... until the remaining mass
/// is below `tail` (or `max_n` is reached).
std::vector<double> displaced_number_distribution(const FockOperator& rho, Complex alpha,
                                                  double tail = 1e-13, int max_n = 4096);

/// Tr[rho T_r(alpha)], equal to sum_n lambda_r^(n) p_n over all photon numbers.
double t_expectation(const FockOperator& rho, double r, Complex alpha);

/// Draws photon numbers after displacement for a fixed state.
///
/// With rho = V V^dag, p_n = |V^dag D(alpha)|n>|^2; columns of D(alpha) are
/// generated one at a time, so a draw stops as soon as the cumulative
/// mass passes the target or n reaches the limit.
class PnrSampler {
 public:
  explicit PnrSampler(const FockOperator& rho);
  /// Photon-number sampler for rho = factor factor^dag.
  static PnrSampler from_factor(Matrix factor);

  int dim() const { return static_cast<int>(factor_.rows()); }
  double trace() const { return trace_; }

  /// n drawn from p_n, or -1 when n >= limit. If `column` is non-null it
  /// receives D(alpha)|n> restricted to the state dimension.
  int sample_n(Complex alpha, int limit, Rng& rng, Vector* column = nullptr) const;

  /// Parity outcome (0 even, 1 odd) of the displaced state.
  int sample_parity(Complex alpha, Rng& rng) const;

 private:
  PnrSampler() = default;
  Matrix factor_;
  double trace_ = 0.0;
  Matrix rho_;
};

/// Uniform draw on the disk |alpha| <= alpha_max.
Complex sample_disk(double alpha_max, Rng& rng);

PnrDraw sample_pnr(const PnrSampler& sampler, const TParams& params, int N, Rng& rng,
                   std::size_t count);
PnrDraw sample_pnr(const FockOperator& rho, const TParams& params, int N, Rng& rng,
                   std::size_t count);

/// Photon-count ceiling for full-outcome records: above it the displaced
/// number distribution of a dim-level state inside the disk carries
/// negligible mass. Counts that reach it are recorded as the ceiling.
int pnr_record_cap(int dim, double alpha_max);

/// Full photon counts (not truncated at an estimator cutoff), as written to
/// record files.
std::vector<PnrSample> sample_pnr_outcomes(const PnrSampler& sampler, const TParams& params,
                                           Rng& rng, std::size_t count);

/// Splits full-count records at the estimator cutoff: n >= N become discards.
PnrDraw filter_pnr(std::span<const PnrSample> records, int N);

/// Photon-parity tomography draws; n holds the parity bit.
std::vector<PnrSample> sample_parity(const FockOperator& rho, double alpha_max, Rng& rng,
                                     std::size_t count);

/// Builds weight * lambda_r^(n) * P_N T_{-r}(alpha) P_N. At r = 0 the
/// closed form T_0(alpha) = (2/pi) D(2 alpha) Pi is used.
class PnrSnapshots {
 public:
  PnrSnapshots(const TParams& params, int N, bool parity_outcomes = false);

  int dim() const { return N_; }
  void add_to(Matrix& sum, const PnrSample& s, double scale = 1.0) const;
  void add_to(Shadow& shadow, const PnrSample& s) const;

 private:
  TParams params_;
  int N_;
  bool parity_;
  mutable Matrix work_;
};

FockOperator pnr_snapshot(const PnrSample& s, const TParams& params, int N);

/// Shadow over all draws, discarded ones included in the count.
Shadow pnr_shadow(const PnrDraw& draw, const TParams& params, int N);
Shadow parity_shadow(std::span<const PnrSample> samples, double alpha_max, int N);

/// Husimi Q(alpha) = <alpha|rho|alpha> / pi.
double husimi_q(const FockOperator& rho, Complex alpha);

/// Rejection sampling of Q against the uniform disk proposal. Throws when
/// the acceptance rate drops below 1e-4.
std::vector<Complex> sample_heterodyne(const FockOperator& rho, double alpha_max, Rng& rng,
                                       std::size_t count);

}  // namespace cvshadow
