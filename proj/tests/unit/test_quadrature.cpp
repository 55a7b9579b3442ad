#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "cvshadow/quadrature.hpp"
#include "oracles.hpp"

using namespace cvshadow;

TEST_CASE("oscillator eigenfunctions") {
  for (double x : {-3.1, -0.4, 0.0, 1.2, 5.5}) {
    std::vector<double> all(12);
    psi_all(x, all);
    const auto ref = oracle::hermite_functions(12, x);
    for (int m = 0; m < 12; ++m) {
      CHECK(all[m] == doctest::Approx(ref[m]).epsilon(1e-10).scale(1e-12));
      CHECK(psi(m, x) == doctest::Approx(all[m]).epsilon(1e-14));
    }
  }
  for (int m : {0, 3, 9}) {
    auto sq = [m](double x) { return psi(m, x) * psi(m, x); };
    const double norm = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(sq, -12.0, 12.0, 10, 1e-13);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(psi(-1, 0.0), std::invalid_argument);
}

TEST_CASE("pattern functions against the irregular-solution construction") {
  const PatternEvaluator ev(6);
  for (double x : {-1.7, -0.9, -0.2, 0.0, 0.35, 1.1, 2.0}) {
    const auto exact = ev.evaluate_exact(x);
    for (int n = 0; n < 6; ++n)
      for (int m = 0; m <= n; ++m)
        CHECK(exact[PatternEvaluator::pair_index(m, n)] ==
              doctest::Approx(oracle::pattern(m, n, x)).epsilon(1e-8).scale(1.0));
  }
  CHECK(ev.pattern(0, 0, 0.0) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("pattern function interpolation") {
  const PatternEvaluator ev(6);
  std::vector<double> interp(ev.pair_count());
  double worst = 0.0;
  for (double x = -7.3; x < 7.3; x += 0.0371) {
    ev.evaluate(x, interp);
    const auto exact = ev.evaluate_exact(x);
    for (int p = 0; p < ev.pair_count(); ++p) worst = std::max(worst, std::abs(interp[p] - exact[p]));
  }
  CHECK(worst < 1e-3);
  // outside the table the exact route is used
  ev.evaluate(30.0, interp);
  const auto far = ev.evaluate_exact(30.0);
  for (int p = 0; p < ev.pair_count(); ++p) CHECK(interp[p] == far[p]);
  CHECK_THROWS_AS(ev.pattern(6, 0, 0.0), std::out_of_range);
  std::vector<double> small(3);
  CHECK_THROWS_AS(ev.evaluate(0.0, small), std::invalid_argument);
}

TEST_CASE("biorthogonality of pattern and quadrature functions") {
  // (1/pi) int dtheta int dx psi_j psi_k e^{-i(j-k)theta} e^{i(m-n)theta} f_mn = delta
  // reduces to int dx psi_j psi_k f_mn = delta_jm delta_kn for j - k = m - n.
  const int N = 5;
  const PatternEvaluator ev(N);
  const QuadratureGrid g = ev.grid();
  std::vector<double> ps(N);
  for (int m = 0; m < N; ++m)
    for (int n = m; n < N; ++n)
      for (int j = 0; j < N; ++j) {
        const int k = j + (n - m);
        if (k >= N) continue;
        double acc = 0.0;
        for (int i = 0; i < g.points; ++i) {
          const double x = g.at(i);
          psi_all(x, ps);
          acc += ps[j] * ps[k] * ev.table(m, n, i);
        }
        acc *= g.spacing();
        const double expected = (j == m && k == n) ? 1.0 : 0.0;
        CHECK(acc == doctest::Approx(expected).scale(1.0).epsilon(1e-6));
      }
}

TEST_CASE("quadrature density") {
  SUBCASE("vacuum is Gaussian with variance 1/2") {
    const auto rho = make_state({states::Vacuum{}, 3});
    const auto d = quadrature_density(rho, 0.4, 2048);
    for (int i = 0; i < d.grid.points; i += 97) {
      const double x = d.grid.at(i);
      CHECK(d.values[i] == doctest::Approx(std::exp(-x * x) / std::sqrt(kPi)).epsilon(1e-12).scale(1e-14));
    }
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("coherent state is shifted by sqrt(2) Re(alpha e^{-i theta})") {
    const Complex a(1.0, 0.5);
    const auto rho = make_state({states::Coherent{a}, 30});
    const double theta = 0.8;
    const auto d = quadrature_density(rho, theta);
    const double mu = std::sqrt(2.0) * (a * std::polar(1.0, -theta)).real();
    double mean = 0.0;
    for (int i = 0; i < d.grid.points; ++i) mean += d.grid.at(i) * d.values[i];
    mean *= d.grid.spacing();
    CHECK(mean == doctest::Approx(mu).epsilon(1e-6));
  }
  SUBCASE("validation") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -0.5;
    CHECK_THROWS_AS(quadrature_density(FockOperator(m), 0.0), std::domain_error);
    Matrix nh = Matrix::Identity(2, 2) * 0.5;
    nh(0, 1) = 0.2;
    CHECK_THROWS_AS(quadrature_density(FockOperator(nh), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_density(make_state({states::Vacuum{}, 2}), kPi), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_density(make_state({states::Vacuum{}, 2}), -0.1), std::invalid_argument);
  }
}

TEST_CASE("samplers agree with the tabulated inverse CDF") {
  const auto rho = make_state({states::RandomPure{3}, 5});
  const QuadratureSampler fast(rho);
  const ConditionalQuadratureSampler cond(5);
  for (double theta : {0.0, 0.7, 2.9}) {
    const auto dens = quadrature_density(rho, theta);
    Rng a(42), b(42), c(42);
    for (int i = 0; i < 50; ++i) {
      const double x_ref = sample_quadrature(dens, a);
      CHECK(fast.sample_x(theta, b) == doctest::Approx(x_ref).epsilon(1e-9).scale(1e-9));
      CHECK(cond.sample_x(rho.matrix(), theta, c) == doctest::Approx(x_ref).epsilon(1e-9).scale(1e-9));
    }
  }
}

TEST_CASE("sampled vacuum moments") {
  const QuadratureSampler s(make_state({states::Vacuum{}, 1}));
  Rng rng(5);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = s.sample_x(1.3, rng);
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1) < 5 * std::sqrt(0.5 / n));
  CHECK(m2 == doctest::Approx(0.5).epsilon(0.01));
}
