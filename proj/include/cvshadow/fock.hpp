#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cvshadow/types.hpp"

namespace cvshadow {

/// Dense operator on the truncated Fock space spanned by |0>, ..., |dim-1>.
///
/// Values are immutable after construction. Construction rejects
/// non-square or non-finite entries; physical checks (Hermiticity,
/// positivity) are left to the operations that need them.
class FockOperator {
 public:
  FockOperator() = default;
  explicit FockOperator(Matrix entries);

  static FockOperator zero(int dim);
  static FockOperator identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  bool is_hermitian(double tol = 1e-12) const;
  double trace() const { return m_.trace().real(); }
  double min_eigenvalue() const;

 private:
  Matrix m_;
};

namespace states {
struct Vacuum {};
struct Fock {
  int n = 0;
};
struct Coherent {
  Complex alpha;
};
struct Cat {
  Complex alpha;
  bool odd = false;
};
struct RandomPure {
  std::uint64_t seed = 0;
};
struct Custom {
  Matrix entries;
};
}  // namespace states

struct StateSpec {
  std::variant<states::Vacuum, states::Fock, states::Coherent, states::Cat, states::RandomPure,
               states::Custom>
      variant;
  int cutoff = 1;
};

/// Amplitudes of a pure state spec. Throws for Custom.
Vector state_vector(const StateSpec& spec);

/// Density matrix for a state spec. Coefficients are normalized before
/// truncation, so the trace drops below one when the state leaks past
/// the cutoff.
FockOperator make_state(const StateSpec& spec);

/// Smallest cutoff for which a coherent or cat amplitude keeps all but
/// `tail` of its photon-number mass.
int suggested_cutoff(Complex alpha, double tail = 1e-12);

/// P_N op P_N as an N x N operator; no renormalization.
FockOperator project(const FockOperator& op, int N);

/// Largest singular value.
double infinity_norm(const Matrix& op);
inline double infinity_norm(const FockOperator& op) { return infinity_norm(op.matrix()); }

/// Sum of singular values.
double trace_norm(const Matrix& op);

FockOperator tensor(const FockOperator& a, const FockOperator& b);
FockOperator tensor(std::span<const FockOperator> factors);

/// Trace out every mode not listed in `keep`. Mode 0 is the most
/// significant index of the Kronecker ordering.
FockOperator partial_trace(const FockOperator& op, std::span<const int> keep,
                           std::span<const int> dims);

/// Matrix elements <j|D(beta)|m> for j < rows, m < cols, by the ladder
/// recurrences of D(beta)^dag a D(beta) = a + beta.
Matrix displacement(Complex beta, int rows, int cols);

/// Displaced parity expectation Tr[op D(alpha) Pi D(alpha)^dag], using
/// D(alpha) Pi D(alpha)^dag = D(2 alpha) Pi.
Complex displaced_parity(const Matrix& op, Complex alpha);

struct WignerGridSpec {
  double q_min = -5.0;
  double q_max = 5.0;
  int q_points = 101;
  double p_min = -5.0;
  double p_max = 5.0;
  int p_points = 101;

  /// Square grid centred at the origin that covers a state of the given cutoff.
  static WignerGridSpec covering(int cutoff, int points = 121);
};

/// W(q, p) on a rectangular grid, normalized so that the integral over
/// dq dp equals the trace of the operator (vacuum peaks at 1/pi).
struct WignerGrid {
  std::vector<double> q;
  std::vector<double> p;
  RealMatrix values;  // values(i, j) = W(q[i], p[j])
  /// Declared bound on |cell sum - trace| from grid truncation.
  double trace_tolerance = 0.02;

  double cell_sum() const;
};

/// Wigner value at one phase-space point, alpha = (q + i p)/sqrt(2).
double wigner_value(const FockOperator& op, double q, double p);
WignerGrid wigner(const FockOperator& op, const WignerGridSpec& spec);

}  // namespace cvshadow
