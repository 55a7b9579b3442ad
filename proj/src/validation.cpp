#include "cvshadow/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "cvshadow/bounds.hpp"
#include "cvshadow/displaced.hpp"
#include "cvshadow/homodyne.hpp"
#include "cvshadow/io.hpp"
#include "cvshadow/multimode.hpp"
#include "cvshadow/quadrature.hpp"

namespace cvshadow {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Check make_check(std::string name, double measured, double limit, std::string detail = {}) {
  return {std::move(name), measured <= limit, measured, limit, std::move(detail)};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// Pure states (|j> + c|k>)/sqrt(2) and |k><k| on D levels; their span is
// every Hermitian D x D matrix.
std::vector<FockOperator> spanning_states(int D) {
  std::vector<FockOperator> out;
  for (int k = 0; k < D; ++k) {
    Matrix m = Matrix::Zero(D, D);
    m(k, k) = 1.0;
    out.emplace_back(m);
  }
  for (int j = 0; j < D; ++j)
    for (int k = j + 1; k < D; ++k)
      for (Complex c : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        Vector v = Vector::Zero(D);
        v(j) = 1.0 / std::sqrt(2.0);
        v(k) = c / std::sqrt(2.0);
        out.emplace_back(Matrix(v * v.adjoint()));
      }
  return out;
}

// 10-point Gauss-Legendre panels on [0, R] for a radial integral with
// measure rho d rho, paired with a uniform angular rule.
struct DiskRule {
  std::vector<Complex> nodes;
  std::vector<double> weights;
};

DiskRule disk_rule(double R, int panels, int angles) {
  using gl = boost::math::quadrature::gauss<double, 10>;
  const auto& x = gl::abscissa();
  const auto& w = gl::weights();
  DiskRule rule;
  const double h = R / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = h * (p + 0.5);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int sign : {-1, 1}) {
        if (x[i] == 0.0 && sign < 0) continue;
        const double rad = mid + sign * x[i] * h / 2;
        const double wr = w[i] * h / 2 * rad;
        for (int a = 0; a < angles; ++a) {
          rule.nodes.push_back(std::polar(rad, 2.0 * kPi * a / angles));
          rule.weights.push_back(wr * 2.0 * kPi / angles);
        }
      }
  }
  return rule;
}

}  // namespace

Check check_homodyne_completeness(int N_max) {
  double worst = 0.0;
  int tested = 0;
  for (int N = 1; N <= N_max; ++N) {
    const int D = N + 2;
    const PatternEvaluator ev(N, 4096, QuadratureGrid::default_half_width(D));
    const HomodyneSnapshots builder(ev, N);
    const int thetas = 2 * D;  // the integrand is a trigonometric polynomial of degree < D + N
    for (const auto& rho : spanning_states(D)) {
      Matrix mean = Matrix::Zero(N, N);
      for (int t = 0; t < thetas; ++t) {
        const double theta = kPi * t / thetas;
        const auto d = quadrature_density(rho, theta, ev.grid().points);
        const double w = d.grid.spacing() / thetas;
        for (int i = 0; i < d.grid.points; ++i)
          if (d.values[i] != 0.0) builder.add_to(mean, {theta, d.grid.at(i)}, d.values[i] * w);
      }
      worst = std::max(worst, max_abs(mean - project(rho, N).matrix()));
      ++tested;
    }
  }
  return make_check("homodyne completeness", worst, 1e-3,
                    std::to_string(tested) + " spanning states, N <= " + std::to_string(N_max));
}

Check check_pnr_duality(int N_max) {
  const std::vector<FockOperator> states = {
      make_state({states::Vacuum{}, 6}),
      make_state({states::Fock{1}, 6}),
      make_state({states::Coherent{Complex(0.5, 0.3)}, 14}),
      make_state({states::Cat{Complex(1.0, 0.0), false}, 14}),
      make_state({states::RandomPure{3}, 4}),
  };
  double worst = 0.0;
  for (int N = 1; N <= N_max; ++N) {
    const DiskRule rule = disk_rule(std::sqrt(4.0 * N), 8, 64);
    for (double r : {0.0, 0.3, -0.3}) {
      std::vector<Matrix> acc(states.size(), Matrix::Zero(N, N));
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Matrix t = t_operator(-r, rule.nodes[q], N);
        for (std::size_t s = 0; s < states.size(); ++s)
          acc[s] += (kPi * rule.weights[q] * t_expectation(states[s], r, rule.nodes[q])) * t;
      }
      for (std::size_t s = 0; s < states.size(); ++s)
        worst = std::max(worst, max_abs(acc[s] - project(states[s], N).matrix()));
    }
  }
  return make_check("PNR duality", worst, 0.02,
                    "disk alpha_max^2 = 4N, r in {0, 0.3, -0.3}, N <= " + std::to_string(N_max));
}

Check check_bound_regression() {
  const double l2 = std::log(2.0), l10 = std::log(10.0);
  const double A = 4.0 * kPi * 2.0;
  const double lam0 = 2.0 / (kPi * 1.3);
  const double lam2 = 2.0 * 1.3 * 1.3 / (kPi * std::pow(0.7, 3));
  const std::vector<std::pair<double, double>> cases = {
      {lemma1_T({0.1, 0.1, 1, 1.0, 0.0}), 200.0 * (l2 + l10)},
      {lemma1_T({0.2, 0.05, 3, 0.0, 4.0}), 60.0 * std::log(120.0)},
      {homodyne_T(0.1, 0.1, 2), 6400.0 * (l10 + std::log(4.0))},
      {homodyne_T(0.1, 0.2, 3, 1.7, 1.0), 2.0 * 9.0 * 1.7 * 27.0 * 100.0 * std::log(30.0)},
      {pnr_T(0.1, 0.1, 2, 0.0, A), 4.0 * 64.0 * kPi * kPi * 100.0 * (std::log(4.0) + l10)},
      {pnr_T(0.1, 0.1, 2, 0.3, 1.0),
       32.0 * 16.0 / (std::pow(kPi, 4) * 0.01 * std::pow(0.91, 2)) * std::pow(1.3 / 0.7, 4) * std::log(40.0)},
      {pnr_norms(3, 0.0, 5.0).nu_sq, 400.0 / std::pow(kPi, 4)},
      {pnr_norms(2, -0.3, 2.0).R, 2.0 * lam0 * lam2 + 2.0},
      {multimode_T(0.1, 0.1, 3, 1, 1.3, 1.0, 0.7), 2.0 * 9.0 * (1.3 + 0.7 * 0.1 / 6.0) * 100.0 * std::log(60.0)},
      {multimode_T(0.1, 0.1, 3, 2, 1.3, 1.0, 0.0), 2.0 * 9.0 * 9.0 * 1.3 * 1.3 * 100.0 * std::log(60.0)},
  };
  double worst = 0.0;
  for (const auto& [got, want] : cases) worst = std::max(worst, std::abs(got - want) / std::abs(want));
  return make_check("bound formulas", worst, 1e-9, std::to_string(cases.size()) + " hand-computed values");
}

Check check_empirical_norms(int N_max) {
  double worst = 0.0;  // largest empirical / analytic ratio
  int tested = 0;
  const std::vector<FockOperator> states = {make_state({states::Vacuum{}, 12}),
                                            make_state({states::Coherent{Complex(0.7, -0.4)}, 16})};
  for (int N = 1; N <= N_max; ++N)
    for (double r : {0.0, 0.3, -0.3}) {
      const TParams params{r, std::sqrt(4.0 * N)};
      const auto bound = pnr_norms(N, r, params.snapshot_weight());
      for (const auto& rho : states) {
        const auto emp = empirical_norms_pnr(rho, params, N, 12, 128);
        worst = std::max({worst, emp.nu_sq / bound.nu_sq, emp.R_observed / bound.R});
        ++tested;
      }
    }
  return make_check("empirical norms within analytic bounds", worst, 1.0,
                    std::to_string(tested) + " (state, N, r) cases; measured is the largest ratio");
}

Check check_parity_wigner() {
  const Complex a2(std::sqrt(2.0), 0.0);
  const std::vector<FockOperator> states = {make_state({states::Vacuum{}, 1}), make_state({states::Fock{1}, 2}),
                                            make_state({states::Cat{a2, false}, suggested_cutoff(a2)})};
  double worst = 0.0;
  for (const auto& rho : states) {
    for (int i = 0; i < 21; ++i)
      for (int j = 0; j < 21; ++j) {
        const double q = -3.0 + 0.3 * i;
        const double p = -3.0 + 0.3 * j;
        const Complex alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
        const Complex parity = (rho.matrix() * t_operator(0.0, alpha, rho.dim())).trace();
        worst = std::max(worst, std::abs(parity - 2.0 * wigner_value(rho, q, p)));
      }
  }
  return make_check("parity and Wigner agree", worst, 1e-8, "21 x 21 grid, vacuum, fock(1), cat(sqrt 2)");
}

Check check_snapshot_hermiticity() {
  Rng rng(101);
  double worst = 0.0;
  for (int N : {1, 3, 6}) {
    const PatternEvaluator ev(N);
    for (int i = 0; i < 50; ++i) {
      const auto f = homodyne_snapshot({kPi * rng.uniform(), 4.0 * rng.normal()}, ev, N);
      worst = std::max(worst, max_abs(f.matrix() - f.matrix().adjoint()));
    }
    for (double r : {0.0, 0.3, -0.3}) {
      const TParams params{r, 3.0};
      for (int i = 0; i < 20; ++i) {
        const PnrSample s{static_cast<int>(N * rng.uniform()), sample_disk(3.0, rng)};
        const auto f = pnr_snapshot(s, params, N);
        worst = std::max(worst, max_abs(f.matrix() - f.matrix().adjoint()) / std::max(1.0, max_abs(f.matrix())));
      }
    }
  }
  return make_check("snapshot Hermiticity", worst, 1e-13);
}

Check check_shadow_merge() {
  const auto rho = make_state({states::Cat{Complex(1.0, 0.5), true}, 14});
  const int N = 4;
  const PatternEvaluator ev(N);
  Rng rng(7);
  const auto all = draw_homodyne(rho, rng, 3000);
  const std::span<const HomodyneSample> s(all);
  const auto a = homodyne_shadow(s.subspan(0, 700), ev, N);
  const auto b = homodyne_shadow(s.subspan(700, 1100), ev, N);
  const auto c = homodyne_shadow(s.subspan(1800), ev, N);
  const auto left = Shadow::merge(Shadow::merge(a, b), c);
  const auto right = Shadow::merge(a, Shadow::merge(b, c));
  const auto whole = homodyne_shadow(s, ev, N);
  const double scale = std::max(1.0, max_abs(whole.sum()));
  double worst = std::max(max_abs(left.sum() - right.sum()), max_abs(left.sum() - whole.sum())) / scale;
  if (left.count() != whole.count() || right.count() != whole.count()) worst = 1.0;
  // PNR shadows keep discards in the count through a merge
  const TParams params{0.0, 2.0};
  const auto d1 = sample_pnr(rho, params, 2, rng, 400);
  const auto d2 = sample_pnr(rho, params, 2, rng, 600);
  const auto m = Shadow::merge(pnr_shadow(d1, params, 2), pnr_shadow(d2, params, 2));
  if (m.count() != 1000) worst = 1.0;
  return make_check("shadow merge", worst, 1e-13, "associativity and agreement with a single pass");
}

Check check_projection_idempotence() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto rho = make_state({states::RandomPure{seed}, 9});
    for (int N = 1; N <= 9; ++N) {
      const auto once = project(rho, N);
      worst = std::max(worst, max_abs(project(once, N).matrix() - once.matrix()));
      worst = std::max(worst, max_abs(once.matrix() - rho.matrix().topLeftCorner(N, N)));
    }
  }
  return make_check("projection idempotence", worst, 0.0);
}

Check check_norm_chain() {
  Rng rng(5);
  double worst = -1.0;  // largest violation; negative when the chain holds with margin
  for (int i = 0; i < 200; ++i) {
    const int N = 1 + static_cast<int>(7 * rng.uniform());
    Matrix x(N, N);
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) x(j, k) = Complex(rng.normal(), rng.normal());
    x = (x + x.adjoint()).eval();
    const double inf = infinity_norm(x);
    const double one = trace_norm(x);
    worst = std::max({worst, (inf - one) / one, (one - N * inf) / one});
  }
  return make_check("norm chain", std::max(worst, 0.0), 1e-12, "||X||_inf <= ||X||_1 <= N ||X||_inf");
}

Check check_sampler_reproducibility() {
  const auto rho = make_state({states::Coherent{Complex(0.8, -0.2)}, 14});
  const TParams params{0.2, 2.0};
  int mismatches = 0;
  {
    Rng a(11), b(11);
    const auto x = draw_homodyne(rho, a, 200);
    const auto y = draw_homodyne(rho, b, 200);
    for (std::size_t i = 0; i < x.size(); ++i) mismatches += x[i].theta != y[i].theta || x[i].x != y[i].x;
  }
  {
    Rng a(12), b(12);
    const auto x = sample_pnr(rho, params, 3, a, 200);
    const auto y = sample_pnr(rho, params, 3, b, 200);
    mismatches += x.samples.size() != y.samples.size() || x.discarded != y.discarded;
    for (std::size_t i = 0; i < std::min(x.samples.size(), y.samples.size()); ++i)
      mismatches += x.samples[i].n != y.samples[i].n || x.samples[i].alpha != y.samples[i].alpha;
  }
  {
    Rng a(13), b(13);
    const auto x = sample_parity(rho, 2.0, a, 200);
    const auto y = sample_parity(rho, 2.0, b, 200);
    for (std::size_t i = 0; i < x.size(); ++i) mismatches += x[i].n != y[i].n || x[i].alpha != y[i].alpha;
  }
  {
    const auto two = two_mode_cat(Complex(1.0, 0.0), 10, true);
    const MultimodeSampler sampler(two, {10, 10});
    Rng a(14), b(14);
    const auto x = sampler.draw_homodyne(a, 100);
    const auto y = sampler.draw_homodyne(b, 100);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
      for (int m = 0; m < 2; ++m) {
        const auto& u = std::get<HomodyneSample>(x.samples[i].per_mode[m]);
        const auto& v = std::get<HomodyneSample>(y.samples[i].per_mode[m]);
        mismatches += u.theta != v.theta || u.x != v.x;
      }
  }
  return make_check("sampler reproducibility", mismatches, 0.0, "homodyne, PNR, parity, two-mode homodyne");
}

Check check_parser_rejection() {
  struct Case {
    std::function<void(std::istream&)> read;
    std::string text;
    int line;
  };
  const auto quad = [](std::istream& in) { read_quadrature_csv(in); };
  const auto pnr = [](std::istream& in) { read_pnr_csv(in); };
  const auto multi = [](std::istream& in) { read_multimode_csv(in); };
  const auto dens = [](std::istream& in) { read_density_json(in); };
  const std::vector<Case> cases = {
      {quad, "theta,x\n4.0,0.1\n", 2},
      {quad, "theta,x\n0.1,nan\n", 2},
      {quad, "# header follows\ntheta,x\n0.1,0.2\n0.1\n", 4},
      {quad, "x,theta\n0.1,0.2\n", 1},
      {quad, "", 0},
      {quad, "theta,x\n", 1},
      {pnr, "n,alpha_re,alpha_im\n-1,0,0\n", 2},
      {pnr, "n,alpha_re,alpha_im\n2.5,0,0\n", 2},
      {multi, "mode0_theta,mode0_x,mode1_theta,mode1_x\n0.1,0.2,5.0,0.1\n", 2},
      {dens, R"({"dim":2,"re":[[1,0]],"im":[[0,0],[0,0]]})", 0},
      {dens, "{", 0},
  };
  int wrong = 0;
  for (const auto& c : cases) {
    std::istringstream in(c.text);
    try {
      c.read(in);
      ++wrong;
    } catch (const ParseError& e) {
      wrong += e.line() != c.line;
    } catch (...) {
      ++wrong;
    }
  }
  return make_check("parser rejection", wrong, 0.0, std::to_string(cases.size()) + " malformed inputs");
}

std::vector<Check> property_suites() {
  return {check_snapshot_hermiticity(), check_shadow_merge(),          check_projection_idempotence(),
          check_norm_chain(),           check_sampler_reproducibility(), check_parser_rejection()};
}

namespace {

FockOperator cat10() {
  const Complex a(std::sqrt(10.0), 0.0);
  return make_state({states::Cat{a, false}, suggested_cutoff(a)});
}

// The reference figure is an error of 0.1; "within a factor of two".
Check factor_two(std::string name, double err, std::string detail) {
  Check c{std::move(name), err >= 0.05 && err <= 0.2, err, 0.2, std::move(detail)};
  return c;
}

}  // namespace

Check check_cat_homodyne(std::uint64_t seed) {
  const int N = 30;
  const auto rho = cat10();
  const PatternEvaluator ev(N);
  Rng rng(seed);
  const auto samples = draw_homodyne(rho, rng, 50000);
  const double err = infinity_norm(shadow_estimate(samples, ev, N).matrix() - project(rho, N).matrix());
  return factor_two("cat(sqrt 10) homodyne", err, "N = 30, T = 5e4, accepted range [0.05, 0.2]");
}

Check check_cat_pnr(std::uint64_t seed) {
  const int N = 30;
  const auto rho = cat10();
  const TParams params{0.0, std::sqrt(static_cast<double>(N))};
  Rng rng(seed);
  const auto draw = sample_pnr(PnrSampler(rho), params, N, rng, 1000000);
  const double err = infinity_norm(pnr_shadow(draw, params, N).estimate().matrix() - project(rho, N).matrix());
  return factor_two("cat(sqrt 10) PNR", err,
                    "N = 30, r = 0, alpha_max^2 = N, T = 1e6, discarded " + fmt(draw.discard_fraction()) +
                        ", accepted range [0.05, 0.2]");
}

TwoModeRun run_two_mode(int seeds, std::size_t T) {
  const int N = 2;
  const Complex a(std::sqrt(1.5), 0.0);
  const int cut = suggested_cutoff(a);
  const PatternEvaluator ev(N);
  const ModeSnapshots builder(ev, N);
  TwoModeRun run;
  for (bool entangled : {false, true}) {
    const auto rho = two_mode_cat(a, cut, entangled);
    const MultimodeSampler sampler(rho, {cut, cut});
    Matrix target(N * N, N * N);
    for (int i = 0; i < N * N; ++i)
      for (int j = 0; j < N * N; ++j) target(i, j) = rho((i / N) * cut + i % N, (j / N) * cut + j % N);
    auto& errors = entangled ? run.entangled : run.separable;
    for (int s = 1; s <= seeds; ++s) {
      Rng rng(static_cast<std::uint64_t>(s));
      const auto draw = sampler.draw_homodyne(rng, T);
      errors.push_back(infinity_norm(multimode_shadow(draw.samples, builder).estimate().matrix() - target));
    }
  }
  return run;
}

std::vector<Check> check_two_mode(const TwoModeRun& run) {
  const double sep = *std::max_element(run.separable.begin(), run.separable.end());
  const double ent = *std::max_element(run.entangled.begin(), run.entangled.end());
  int ordered = 0;
  for (std::size_t i = 0; i < run.separable.size(); ++i) ordered += run.entangled[i] >= run.separable[i];
  const int need = static_cast<int>(std::ceil(0.8 * run.separable.size()));
  std::vector<Check> out;
  out.push_back(make_check("two-mode separable error", sep, 0.06, "worst of " + std::to_string(run.separable.size()) +
                                                                       " seeds, N = 2, T = 5e4"));
  out.push_back(make_check("two-mode entangled error", ent, 0.10, "worst of " + std::to_string(run.entangled.size()) +
                                                                        " seeds, N = 2, T = 5e4"));
  out.push_back({"two-mode ordering (entangled >= separable)", ordered >= need, static_cast<double>(ordered),
                 static_cast<double>(need), "seeds with entangled error >= separable error"});
  return out;
}

std::vector<Check> run_validation(bool full, const std::function<void(const Check&)>& on_result) {
  std::vector<Check> out;
  const auto add = [&](Check c) {
    if (on_result) on_result(c);
    out.push_back(std::move(c));
  };
  add(check_homodyne_completeness());
  add(check_pnr_duality());
  add(check_bound_regression());
  add(check_empirical_norms());
  add(check_parity_wigner());
  add(check_snapshot_hermiticity());
  add(check_shadow_merge());
  add(check_projection_idempotence());
  add(check_norm_chain());
  add(check_sampler_reproducibility());
  add(check_parser_rejection());
  if (full) {
    add(check_cat_homodyne());
    add(check_cat_pnr());
    for (auto& c : check_two_mode(run_two_mode())) add(std::move(c));
  }
  return out;
}

}  // namespace cvshadow
