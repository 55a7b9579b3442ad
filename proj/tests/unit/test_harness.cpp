#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvshadow/harness.hpp"
#include "cvshadow/io.hpp"

using namespace cvshadow;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.N_list = {2};
  c.trials_per_T = 40;
  c.search.T_min = 64;
  c.search.T_max = 1 << 16;
  c.root_seed = 7;
  c.threads = 1;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cvshadow_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("Wilson interval") {
  const auto [lo, hi] = wilson_interval(10, 100);
  // hand evaluation of the score formula at p = 0.1, z = 1.96
  CHECK(lo == doctest::Approx(0.05523).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.17437).epsilon(1e-3));
  const auto [l0, h0] = wilson_interval(0, 50);
  CHECK(l0 == 0.0);
  CHECK(h0 > 0.0);
  CHECK(h0 < 0.1);
  CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
}

TEST_CASE("exponent fit") {
  std::vector<std::pair<double, double>> exact;
  for (int N = 2; N <= 6; ++N) exact.emplace_back(N, 7.0 * N * N * N);
  const auto f = fit_exponent(exact);
  CHECK(std::abs(f.p - 3.0) < 1e-12);
  CHECK(std::abs(f.intercept - std::log(7.0)) < 1e-12);
  CHECK(f.p_stderr < 1e-10);
  CHECK(f.r_squared == doctest::Approx(1.0));

  Rng rng(3);
  std::vector<std::pair<double, double>> noisy;
  for (int N = 2; N <= 40; ++N) noisy.emplace_back(N, 5.0 * N * N * std::exp(0.05 * rng.normal()));
  const auto g = fit_exponent(noisy);
  CHECK(std::abs(g.p - 2.0) < 4.0 * g.p_stderr + 1e-3);
  CHECK(g.p_stderr > 0.0);
  CHECK(g.residuals.size() == noisy.size());

  CHECK_THROWS_AS(fit_exponent({{2, 1}, {3, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_exponent({{2, 1}, {2, 2}, {2, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_exponent({{2, 1}, {3, -2}, {4, 3}}), std::invalid_argument);
}

TEST_CASE("config JSON") {
  const auto j = nlohmann::json::parse(R"({
    "state": {"kind": "cat", "alpha_re": 1.0},
    "protocol": {"kind": "pnr", "r": 0.2, "region_factor": 1.0},
    "N_list": [2, 3, 4],
    "epsilon": 0.2, "delta": 0.05, "trials_per_T": 50,
    "T_search": {"T_min": 100, "T_max": 10000},
    "root_seed": 11
  })");
  const auto c = config_from_json(j);
  CHECK(c.protocol.kind == ProtocolSpec::Kind::pnr);
  CHECK(c.protocol.params(4).alpha_max == doctest::Approx(2.0));
  CHECK(c.N_list.size() == 3);
  CHECK(c.search.T_max == 10000);
  const auto again = config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"epsilon": -1})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"delta": 1.5})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"protocol": "heterodyne"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"protocol": {"kind": "parity", "r": 0.3}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"state": {"kind": "squeezed"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"N_list": []})")), std::invalid_argument);
}

TEST_CASE("state specs") {
  CHECK(make_state(state_from_json({{"kind", "fock"}, {"n", 3}})).dim() == 4);
  CHECK(make_state(state_from_json({{"kind", "vacuum"}}, 6)).dim() == 6);
  const auto cat = make_state(state_from_json({{"kind", "cat"}, {"alpha_re", 1.5}, {"odd", true}}));
  CHECK(cat.trace() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(cat(0, 0)) < 1e-12);
  const auto custom = nlohmann::json::parse(
      R"({"kind": "density", "density": {"dim": 2, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0], [0, 0]]}})");
  const auto mixed = make_state(state_from_json(custom, 3));
  CHECK(mixed.dim() == 3);
  CHECK(mixed(1, 1).real() == 0.5);
}

TEST_CASE("trial sets are deterministic and independent of thread count") {
  auto c = small_config();
  TrialSet a(c, 2);
  c.threads = 3;
  TrialSet b(c, 2);
  const auto ea = a.evaluate(500);
  const auto eb = b.evaluate(500);
  CHECK(ea.errors == eb.errors);

  // checkpoints: evaluating 200 then 500 equals evaluating 500 directly
  TrialSet s(small_config(), 2);
  s.evaluate(200);
  CHECK(s.evaluate(500).errors == ea.errors);
  CHECK(s.evaluate(200).errors == TrialSet(small_config(), 2).evaluate(200).errors);

  for (auto kind : {ProtocolSpec::Kind::pnr, ProtocolSpec::Kind::parity}) {
    auto p = small_config();
    p.protocol.kind = kind;
    TrialSet x(p, 2), y(p, 2);
    x.evaluate(100);
    CHECK(x.evaluate(300).errors == y.evaluate(300).errors);
  }
}

TEST_CASE("failure rate falls with T") {
  auto c = small_config();
  c.trials_per_T = 60;
  TrialSet trials(c, 2);
  std::vector<std::pair<double, double>> curve;
  double previous = 1.0;
  for (std::size_t T : {250, 500, 1000, 2000, 4000}) {
    const auto e = trials.evaluate(T);
    CHECK(e.delta_hat <= previous + 0.1);
    previous = e.delta_hat;
    CHECK(e.ci_low <= e.delta_hat);
    CHECK(e.delta_hat <= e.ci_high);
  }
  CHECK(trials.evaluate(16000).delta_hat < 0.05);
  CHECK(trials.evaluate(64).delta_hat > 0.5);
}

TEST_CASE("minimal T search") {
  const auto c = small_config();
  const auto r = find_min_T(c, 2);
  REQUIRE(r.min_T.has_value());
  CHECK_FALSE(r.censored);
  CHECK_FALSE(r.at_lower_bound);
  CHECK(*r.min_T > c.search.T_min);
  CHECK(std::is_sorted(r.evaluations.begin(), r.evaluations.end(),
                       [](const Evaluation& a, const Evaluation& b) { return a.T < b.T; }));
  for (const auto& e : r.evaluations) {
    if (e.T == *r.min_T) CHECK(e.delta_hat <= c.delta);
  }
  // the bracket below min_T failed and lies within the resolution
  std::size_t below = 0;
  for (const auto& e : r.evaluations)
    if (e.T < *r.min_T && e.delta_hat > c.delta) below = std::max(below, e.T);
  CHECK(static_cast<double>(*r.min_T - below) <= c.search.resolution * static_cast<double>(below) + 1);

  auto loose = c;
  loose.epsilon = 0.4;
  const auto rl = find_min_T(loose, 2);
  REQUIRE(rl.min_T.has_value());
  CHECK(*rl.min_T < *r.min_T);

  auto tiny = c;
  tiny.search.T_max = 256;
  const auto rc = find_min_T(tiny, 2);
  CHECK(rc.censored);
  CHECK_FALSE(rc.min_T.has_value());

  auto easy = c;
  easy.epsilon = 50.0;
  const auto re = find_min_T(easy, 2);
  CHECK(re.at_lower_bound);
  CHECK(re.min_T == c.search.T_min);
}

TEST_CASE("scaling report JSON") {
  auto c = small_config();
  c.N_list = {1, 2, 3};
  c.trials_per_T = 20;
  c.epsilon = 0.3;
  const auto report = run_scaling(c);
  CHECK(report.results.size() == 3);
  CHECK_FALSE(report.any_censored());
  REQUIRE(report.fit.has_value());
  const auto j = to_json(report);
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  CHECK(j.at("results").size() == 3);
  CHECK(j.at("fit").at("exponent").is_number());
  CHECK(j.at("started").get<std::string>().size() == 20);
  CHECK(config_from_json(j.at("config")).N_list == c.N_list);

  c.search.T_max = 128;
  const auto censored = run_scaling(c);
  CHECK(censored.any_censored());
  CHECK_FALSE(censored.fit.has_value());
  CHECK(to_json(censored).at("fit").is_null());
}

TEST_CASE("reconstruction from records and from the simulator") {
  const int N = 4;
  const auto vac = make_state({states::Vacuum{}, 8});
  Rng rng(17);
  const auto samples = draw_homodyne(vac, rng, 100000);
  const auto records = scratch("vac.csv");
  {
    std::ofstream out(records);
    out << "# synthetic vacuum\n";
    write_quadrature_csv(out, samples);
  }
  ReconstructionRequest req;
  req.N = N;
  req.records = records;
  req.reference = vac;
  req.density_out = scratch("rho.json");
  req.wigner_out = scratch("w.csv");
  req.report_out = scratch("report.json");
  const auto res = run_reconstruction(req);
  REQUIRE(res.error.has_value());
  CHECK(*res.error < 0.05);
  CHECK(read_density_file(req.density_out).dim() == N);
  std::ifstream rep(req.report_out);
  const auto j = nlohmann::json::parse(rep);
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  CHECK(j.at("shots") == 100000);
  std::ifstream w(req.wigner_out);
  std::string header;
  std::getline(w, header);
  CHECK(header == "q,p,w");

  ReconstructionRequest wrong = req;
  wrong.protocol.kind = ProtocolSpec::Kind::pnr;
  CHECK_THROWS_AS(run_reconstruction(wrong), std::invalid_argument);

  const auto empty = scratch("empty.csv");
  {
    std::ofstream out(empty);
    out << "theta,x\n";
  }
  ReconstructionRequest none;
  none.N = 2;
  none.records = empty;
  CHECK_THROWS_AS(run_reconstruction(none), ParseError);

  ReconstructionRequest sim;
  sim.N = 3;
  sim.protocol.kind = ProtocolSpec::Kind::parity;
  sim.protocol.region_factor = 1.0;
  sim.simulate_state = nlohmann::json{{"kind", "coherent"}, {"alpha_re", 0.3}};
  sim.T = 200000;
  sim.seed = 5;
  const auto s = run_reconstruction(sim);
  REQUIRE(s.error.has_value());
  CHECK(*s.error < 0.1);
  CHECK(run_reconstruction(sim).estimate.matrix() == s.estimate.matrix());
  sim.T = 0;
  CHECK_THROWS_AS(run_reconstruction(sim), std::invalid_argument);
}

TEST_CASE("reconstruction rejects displacements outside the disk") {
  const auto path = scratch("far.csv");
  {
    std::ofstream out(path);
    write_pnr_csv(out, std::vector<PnrSample>{{0, Complex(0.1, 0.0)}, {1, Complex(9.0, 0.0)}});
  }
  ReconstructionRequest req;
  req.N = 2;
  req.records = path;
  req.protocol.kind = ProtocolSpec::Kind::pnr;
  CHECK_THROWS_AS(run_reconstruction(req), std::domain_error);
}
