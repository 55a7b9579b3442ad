#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "cvshadow/io.hpp"

using namespace cvshadow;

namespace {

int error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("shortest round-trip formatting") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(40 * rng.uniform()) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("density JSON") {
  const auto rho = make_state({states::RandomPure{4}, 5});
  std::stringstream ss;
  write_density_json(ss, rho);
  const auto back = read_density_json(ss);
  CHECK(back.dim() == 5);
  CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_density_json(in, "t.json");
  };
  CHECK(parse(R"({"dim":1,"re":[[1]],"im":[[0]]})").trace() == 1.0);
  CHECK_THROWS_AS(parse("{"), ParseError);
  CHECK_THROWS_AS(parse(R"({"re":[[1]],"im":[[0]]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"dim":2,"re":[[1,0]],"im":[[0,0],[0,0]]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"dim":1,"re":[["a"]],"im":[[0]]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"dim":0,"re":[],"im":[]})"), ParseError);
}

TEST_CASE("Wigner CSV") {
  const auto g = wigner(make_state({states::Vacuum{}, 2}), {-1.0, 1.0, 3, -2.0, 2.0, 2});
  std::ostringstream out;
  write_wigner_csv(out, g);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "q,p,w");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(out.str().find("\n-1,-2,") != std::string::npos);
}

TEST_CASE("quadrature records") {
  SUBCASE("round trip") {
    const std::vector<HomodyneSample> s = {{0.0, 0.25}, {1.2345678901234567, -3.5}, {3.14, 1e-300}};
    std::stringstream ss;
    write_quadrature_csv(ss, s);
    const std::string first = ss.str();
    const auto back = read_quadrature_csv(ss);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(back[i].theta == s[i].theta);
      CHECK(back[i].x == s[i].x);
    }
    std::ostringstream again;
    write_quadrature_csv(again, back);
    CHECK(again.str() == first);
  }
  SUBCASE("comments, blank lines and whitespace") {
    std::istringstream in("# lab run 3\ntheta,x\n\n0.5, 1.0\r\n# gap\n  1.0,2.0\n");
    const auto s = read_quadrature_csv(in);
    REQUIRE(s.size() == 2);
    CHECK(s[1].x == 2.0);
  }
  SUBCASE("rejections carry line numbers") {
    const auto line_of = [](const std::string& text) {
      return error_line([&] {
        std::istringstream in(text);
        read_quadrature_csv(in, "q.csv");
      });
    };
    CHECK(line_of("theta,x\n4.0,0.1\n") == 2);
    CHECK(line_of("theta,x\n0.1,0.2\n-0.1,0.1\n") == 3);
    CHECK(line_of("theta,x\n0.1,nan\n") == 2);
    CHECK(line_of("theta,x\n0.1,inf\n") == 2);
    CHECK(line_of("theta,x\n0.1\n") == 2);
    CHECK(line_of("theta,x\n0.1,0.2,0.3\n") == 2);
    CHECK(line_of("theta,x\n0.1,abc\n") == 2);
    CHECK(line_of("theta,x\n0.1,1.0x\n") == 2);
    CHECK(line_of("# c\nx,theta\n") == 2);
    CHECK(line_of("") == 0);
    CHECK(line_of("# only a comment\n") == 0);
    CHECK(line_of("theta,x\n") == 1);
    try {
      std::istringstream in("theta,x\n4.0,0.1\n");
      read_quadrature_csv(in, "q.csv");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("q.csv:2:") == 0);
    }
  }
}

TEST_CASE("PNR and heterodyne records") {
  const std::vector<PnrSample> p = {{0, Complex(0.1, -0.2)}, {17, Complex(-3.0, 4.5)}};
  std::stringstream ss;
  write_pnr_csv(ss, p);
  const auto back = read_pnr_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].n == 17);
  CHECK(back[1].alpha == p[1].alpha);

  const auto line_of = [](const std::string& text) {
    return error_line([&] {
      std::istringstream in(text);
      read_pnr_csv(in);
    });
  };
  CHECK(line_of("n,alpha_re,alpha_im\n-1,0,0\n") == 2);
  CHECK(line_of("n,alpha_re,alpha_im\n1.5,0,0\n") == 2);
  CHECK(line_of("n,alpha_re,alpha_im\n1,0\n") == 2);
  CHECK(line_of("n,alpha_re\n") == 1);

  const std::vector<Complex> h = {{0.5, 0.25}, {-1.0, 3.0}};
  std::stringstream hs;
  write_heterodyne_csv(hs, h);
  const auto hb = read_heterodyne_csv(hs);
  CHECK(hb == h);
  std::istringstream bad("alpha_re,alpha_im\n1,2\n3,x\n");
  CHECK(error_line([&] { read_heterodyne_csv(bad); }) == 3);
}

TEST_CASE("multimode records") {
  MultimodeRecords hom{Protocol::homodyne, 2, {}};
  MultimodeSample a;
  a.per_mode = {HomodyneSample{0.1, 0.2}, HomodyneSample{1.5, -0.7}};
  hom.samples = {a, a};
  std::stringstream ss;
  write_multimode_csv(ss, hom);
  CHECK(ss.str().rfind("mode0_theta,mode0_x,mode1_theta,mode1_x\n", 0) == 0);
  const auto back = read_multimode_csv(ss);
  CHECK(back.protocol == Protocol::homodyne);
  CHECK(back.modes == 2);
  REQUIRE(back.samples.size() == 2);
  CHECK(std::get<HomodyneSample>(back.samples[1].per_mode[1]).x == -0.7);

  MultimodeRecords pnr{Protocol::pnr, 3, {}};
  MultimodeSample b;
  b.per_mode = {PnrSample{1, Complex(0.5, 0.5)}, PnrSample{0, Complex(0, 0)}, PnrSample{4, Complex(-1, 2)}};
  pnr.samples = {b};
  std::stringstream ps;
  write_multimode_csv(ps, pnr);
  const auto pb = read_multimode_csv(ps);
  CHECK(pb.protocol == Protocol::pnr);
  CHECK(pb.modes == 3);
  CHECK(std::get<PnrSample>(pb.samples[0].per_mode[2]).n == 4);

  std::istringstream bad_header("mode0_theta,mode1_x\n0,0\n");
  CHECK(error_line([&] { read_multimode_csv(bad_header); }) == 1);
  std::istringstream bad_row("mode0_theta,mode0_x,mode1_theta,mode1_x\n0.1,0.2,5.0,0.1\n");
  CHECK(error_line([&] { read_multimode_csv(bad_row); }) == 2);
}

TEST_CASE("pattern table dump") {
  const PatternEvaluator ev(3, 64);
  std::ostringstream out;
  write_pattern_table(out, ev);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "m,n,x,f");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (rows == 1) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const auto c3 = line.find(',', c2 + 1);
      CHECK(line.substr(0, c2) == "0,0");
      CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) == ev.grid().at(0));
      CHECK(std::stod(line.substr(c3 + 1)) == ev.table(0, 0, 0));
    }
  }
  CHECK(rows == 6 * 64);
}

TEST_CASE("record summaries") {
  const std::vector<HomodyneSample> s = {{0.0, 1.0}, {3.1, -2.0}, {1.6, 0.5}};
  const auto q = summarize(std::span<const HomodyneSample>(s), 2);
  CHECK(q.count == 3);
  CHECK(q.theta_histogram == std::vector<std::size_t>{1, 2});
  CHECK(q.x_min == -2.0);
  CHECK(q.x_max == 1.0);
  const std::vector<PnrSample> p = {{2, Complex(3, 4)}, {0, 0.0}};
  const auto ps = summarize(std::span<const PnrSample>(p));
  CHECK(ps.n_histogram == std::vector<std::size_t>{1, 0, 1});
  CHECK(ps.alpha_abs_max == 5.0);
}

TEST_CASE("simulated and ingested records give the same estimate") {
  const int N = 3;
  const auto rho = make_state({states::Cat{Complex(std::sqrt(2.0), 0.0), false}, 16});

  Rng rng(31);
  const auto samples = draw_homodyne(rho, rng, 2000);
  std::stringstream ss;
  write_quadrature_csv(ss, samples);
  const auto back = read_quadrature_csv(ss);
  const PatternEvaluator ev(N);
  const Matrix direct = shadow_estimate(samples, ev, N).matrix();
  const Matrix ingested = shadow_estimate(back, ev, N).matrix();
  CHECK((direct - ingested).cwiseAbs().maxCoeff() == 0.0);

  const TParams params = TParams::with_default_region(N);
  const auto records = sample_pnr_outcomes(PnrSampler(rho), params, rng, 2000);
  std::stringstream ps;
  write_pnr_csv(ps, records);
  const auto pback = read_pnr_csv(ps);
  const auto d1 = filter_pnr(records, N);
  const auto d2 = filter_pnr(pback, N);
  CHECK(d1.discarded == d2.discarded);
  CHECK(d1.discarded > 0);
  const Matrix e1 = pnr_shadow(d1, params, N).estimate().matrix();
  const Matrix e2 = pnr_shadow(d2, params, N).estimate().matrix();
  CHECK((e1 - e2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full-count PNR records follow the displaced number distribution") {
  const auto rho = make_state({states::Coherent{Complex(0.5, 0.0)}, 10});
  const TParams params{0.0, 1.0};
  Rng rng(2);
  const auto records = sample_pnr_outcomes(PnrSampler(rho), params, rng, 20000);
  const int cap = pnr_record_cap(10, 1.0);
  double mean = 0.0;
  for (const auto& r : records) {
    CHECK(r.n < cap);
    mean += r.n;
  }
  mean /= static_cast<double>(records.size());
  // E|alpha - beta|^2 over the unit disk = 1/2 + |beta|^2
  CHECK(std::abs(mean - 0.75) < 0.03);
  const auto draw = filter_pnr(records, 2);
  CHECK(draw.total() == records.size());
  for (const auto& s : draw.samples) CHECK(s.n < 2);
}
