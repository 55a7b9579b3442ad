#include <doctest.h>

#include <cmath>

#include "cvshadow/displaced.hpp"
#include "oracles.hpp"

using namespace cvshadow;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("eigenvalues of the T-operators") {
  CHECK(lambda(0, 0.0) == doctest::Approx(2.0 / kPi));
  CHECK(lambda(3, 0.0) == doctest::Approx(-2.0 / kPi));
  CHECK(lambda(2, 0.5) == doctest::Approx(2.0 * 0.25 / (kPi * std::pow(1.5, 3))));
  // the eigenvalue sum is Tr T_r = 1/pi whenever it converges
  for (double r : {0.3, 0.5, 0.8}) {
    double s = 0.0;
    for (int n = 0; n < 400; ++n) s += lambda(n, r);
    CHECK(s == doctest::Approx(1.0 / kPi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lambda(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda(0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda(-1, 0.0), std::invalid_argument);
}

TEST_CASE("T-operator matrices against the reference expansion") {
  for (double r : {0.0, 0.3, -0.3, 0.7, -0.5}) {
    for (Complex a : {Complex(0.0, 0.0), Complex(0.4, -0.2), Complex(-1.3, 0.9), Complex(2.5, 1.5)}) {
      const int N = 5;
      const Matrix t = t_operator(r, a, N);
      const Matrix ref = oracle::t_operator(r, a, N, 120);
      const double scale = std::max(1.0, max_abs(ref));
      CHECK(max_abs(t - ref) < 1e-12 * scale);
      // the plain eigen-expansion cancels badly once the weights grow (r < 0)
      if (r >= 0.0) CHECK(max_abs(t_operator_series(r, a, N) - ref) < 1e-12 * scale);
      CHECK(max_abs(t - t.adjoint()) == 0.0);
    }
  }
  CHECK_THROWS_AS(t_operator(1.0, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(t_operator(0.0, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(t_operator(0.0, Complex(std::nan(""), 0.0), 3), std::invalid_argument);
}

TEST_CASE("T_0 at large displacement matches the displaced parity closed form") {
  const Complex a(7.0, -7.5);
  const int N = 30;
  const Matrix t = t_operator(0.0, a, N);
  const Matrix d = oracle::displacement(2.0 * a, N, N);
  Matrix ref(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) ref(j, k) = 2.0 / kPi * d(j, k) * (k % 2 == 0 ? 1.0 : -1.0);
  CHECK(max_abs(t - ref) < 1e-12);
}

TEST_CASE("displaced number distribution") {
  const Complex beta(0.7, -1.1);
  const Complex alpha(-0.2, 0.4);
  const auto rho = make_state({states::Coherent{beta}, 40});
  const auto p = displaced_number_distribution(rho, alpha);
  const double mu = std::norm(beta - alpha);
  double total = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    total += p[n];
    if (n < 12) CHECK(p[n] == doctest::Approx(std::exp(-mu) * std::pow(mu, n) / std::tgamma(n + 1.0)).epsilon(1e-10));
  }
  CHECK(total == doctest::Approx(rho.trace()).epsilon(1e-12));
}

TEST_CASE("T expectations") {
  const auto rho = make_state({states::RandomPure{5}, 5});
  for (double r : {0.0, 0.4}) {
    for (Complex a : {Complex(0.3, 0.1), Complex(-1.0, 1.2)}) {
      // sum over displaced photon-number probabilities
      const auto p = displaced_number_distribution(rho, a, 1e-15);
      double series = 0.0;
      for (std::size_t n = 0; n < p.size(); ++n) series += lambda(static_cast<int>(n), r) * p[n];
      CHECK(t_expectation(rho, r, a) == doctest::Approx(series).epsilon(1e-10));
    }
  }
  const Complex a(-1.0, 1.2);
  const double reference = (rho.matrix() * oracle::t_operator(-0.4, a, 5, 120)).trace().real();
  CHECK(t_expectation(rho, -0.4, a) == doctest::Approx(reference).epsilon(1e-10));
  // r = 0 is twice the Wigner function in (q, p) normalization
  const auto f1 = make_state({states::Fock{1}, 3});
  CHECK(t_expectation(f1, 0.0, 0.0) == doctest::Approx(2.0 * wigner_value(f1, 0.0, 0.0)));
}

TEST_CASE("photon-number sampling") {
  const auto rho = make_state({states::RandomPure{12}, 4});
  const PnrSampler sampler(rho);
  const Complex alpha(0.5, -0.3);
  const auto p = displaced_number_distribution(rho, alpha);
  const int limit = 4;
  std::vector<double> freq(limit + 1, 0.0);
  Rng rng(8);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const int k = sampler.sample_n(alpha, limit, rng);
    freq[k < 0 ? limit : k] += 1.0 / n;
  }
  double tail = 1.0;
  for (int k = 0; k < limit; ++k) {
    CHECK(std::abs(freq[k] - p[k]) < 5 * std::sqrt(p[k] * (1 - p[k]) / n) + 1e-4);
    tail -= p[k];
  }
  CHECK(std::abs(freq[limit] - tail) < 5 * std::sqrt(tail * (1 - tail) / n) + 1e-4);

  Vector col;
  Rng r2(3);
  const int k = sampler.sample_n(alpha, 50, r2, &col);
  CHECK(k >= 0);
  const Matrix d = oracle::displacement(alpha, 4, k + 1);
  CHECK((col - d.col(k)).norm() < 1e-12);
}

TEST_CASE("parity sampling frequency") {
  const auto rho = make_state({states::Fock{1}, 3});
  const PnrSampler sampler(rho);
  const Complex alpha(0.4, 0.2);
  const double p_even = 0.5 * (1.0 + kPi * wigner_value(rho, std::sqrt(2.0) * 0.4, std::sqrt(2.0) * 0.2));
  Rng rng(4);
  int even = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) even += sampler.sample_parity(alpha, rng) == 0;
  CHECK(std::abs(even / double(n) - p_even) < 5 * std::sqrt(p_even * (1 - p_even) / n));
}

TEST_CASE("PNR draws, snapshots and shadows") {
  const int N = 3;
  const auto rho = make_state({states::Coherent{Complex(0.4, 0.2)}, 20});
  const TParams params = TParams::with_default_region(N);
  CHECK(params.snapshot_weight() == doctest::Approx(4.0 * N * kPi * kPi));
  CHECK(params.area() == doctest::Approx(4.0 * N * kPi));
  Rng rng(10);
  const auto draw = sample_pnr(rho, params, N, rng, 5000);
  CHECK(draw.total() == 5000);
  CHECK(draw.discarded > 0);
  for (const auto& s : draw.samples) {
    CHECK(s.n < N);
    CHECK(std::abs(s.alpha) <= params.alpha_max);
  }
  const auto shadow = pnr_shadow(draw, params, N);
  CHECK(shadow.count() == 5000);
  CHECK(max_abs(shadow.sum() - shadow.sum().adjoint()) == 0.0);

  for (double r : {0.0, 0.3, -0.3}) {
    const TParams tp{r, 2.0};
    const auto snap = pnr_snapshot({1, Complex(0.3, -0.8)}, tp, N);
    CHECK(max_abs(snap.matrix() - snap.matrix().adjoint()) == 0.0);
    const Matrix expected = tp.snapshot_weight() * lambda(1, r) * t_operator(-r, Complex(0.3, -0.8), N);
    CHECK(max_abs(snap.matrix() - expected) < 1e-10 * std::max(1.0, max_abs(expected)));
  }
  CHECK_THROWS_AS(pnr_snapshot({N, 0.0}, params, N), std::out_of_range);
  CHECK_THROWS_AS(pnr_snapshot({-1, 0.0}, params, N), std::invalid_argument);
  CHECK_THROWS_AS(sample_pnr(rho, params, N, rng, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_pnr(rho, TParams{0.0, -1.0}, N, rng, 10), std::invalid_argument);

  Rng a(5), b(5);
  const auto d1 = sample_pnr(rho, params, N, a, 100);
  const auto d2 = sample_pnr(rho, params, N, b, 100);
  REQUIRE(d1.samples.size() == d2.samples.size());
  for (std::size_t i = 0; i < d1.samples.size(); ++i) {
    CHECK(d1.samples[i].n == d2.samples[i].n);
    CHECK(d1.samples[i].alpha == d2.samples[i].alpha);
  }
}

TEST_CASE("parity shadows accept outcomes beyond the cutoff") {
  const auto rho = make_state({states::Fock{1}, 3});
  Rng rng(2);
  const auto samples = sample_parity(rho, 2.0, rng, 100);
  const auto shadow = parity_shadow(samples, 2.0, 1);
  CHECK(shadow.count() == 100);
  CHECK_THROWS_AS(PnrSnapshots(TParams{0.3, 2.0}, 2, true), std::invalid_argument);
}

TEST_CASE("Husimi function and heterodyne sampling") {
  const Complex beta(0.8, -0.6);
  const auto rho = make_state({states::Coherent{beta}, 30});
  for (Complex a : {Complex(0.0, 0.0), Complex(1.0, 0.3), Complex(-0.5, -1.2)})
    CHECK(husimi_q(rho, a) == doctest::Approx(std::exp(-std::norm(a - beta)) / kPi).epsilon(1e-10));

  Rng rng(6);
  const auto xs = sample_heterodyne(rho, 5.0, rng, 20000);
  Complex mean = 0.0;
  for (const auto& a : xs) mean += a;
  mean /= static_cast<double>(xs.size());
  CHECK(std::abs(mean - beta) < 0.03);
  CHECK_THROWS_AS(sample_heterodyne(make_state({states::Vacuum{}, 2}), 1000.0, rng, 10), std::domain_error);
}
