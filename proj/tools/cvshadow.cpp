#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cvshadow/bounds.hpp"
#include "cvshadow/harness.hpp"
#include "cvshadow/io.hpp"
#include "cvshadow/validation.hpp"

using namespace cvshadow;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCensored = 3;

json parse_json_arg(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '"')) return json::parse(text);
  std::ifstream in(text);
  if (!in) throw std::invalid_argument("cannot open " + text);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(text, 0, e.what());
  }
}

struct ProtocolArgs {
  std::string kind = "homodyne";
  double r = 0.0;
  double alpha_max = 0.0;
  double region_factor = 4.0;

  void attach(CLI::App* app) {
    app->add_option("--protocol", kind, "homodyne, pnr or parity")->capture_default_str();
    app->add_option("--r", r, "T-operator parameter for pnr, in (-1, 1)")->capture_default_str();
    app->add_option("--alpha-max", alpha_max, "displacement disk radius (0: from --region-factor)");
    app->add_option("--region-factor", region_factor, "alpha_max^2 = factor * N")->capture_default_str();
  }
  ProtocolSpec spec() const {
    ProtocolSpec p;
    p.kind = protocol_kind(kind);
    p.r = r;
    p.alpha_max = alpha_max;
    p.region_factor = region_factor;
    p.validate();
    return p;
  }
};

// Multimode states: {"kind": "two_mode_cat", "alpha_re", "alpha_im", "entangled", "cutoff"}
// or any single-mode spec repeated on every mode.
std::pair<FockOperator, std::vector<int>> multimode_state(const json& j, int modes) {
  if (j.value("kind", "") == "two_mode_cat") {
    if (modes != 2) throw std::invalid_argument("two_mode_cat needs --modes 2");
    const Complex a(j.value("alpha_re", 0.0), j.value("alpha_im", 0.0));
    const int cut = j.value("cutoff", suggested_cutoff(a));
    return {two_mode_cat(a, cut, j.value("entangled", true)), {cut, cut}};
  }
  const StateSpec one = state_from_json(j);
  const std::vector<StateSpec> all(modes, one);
  return {product_state(all), std::vector<int>(modes, one.cutoff)};
}

int cmd_simulate(const json& state_json, const ProtocolArgs& pa, bool heterodyne, int N, int modes, std::size_t T,
                 std::uint64_t seed, const std::string& out_path) {
  if (T == 0) throw std::invalid_argument("--T must be positive");
  if (modes < 1) throw std::invalid_argument("--modes must be positive");
  Rng rng(seed);
  std::ostringstream out;
  out << "# simulated state=" << state_json.dump() << " seed=" << seed << "\n";
  if (heterodyne) {
    if (modes != 1) throw std::invalid_argument("heterodyne records are single-mode");
    const double amax = pa.alpha_max > 0.0 ? pa.alpha_max : std::sqrt(pa.region_factor * N);
    write_heterodyne_csv(out, sample_heterodyne(make_state(state_from_json(state_json)), amax, rng, T));
  } else if (modes > 1) {
    const ProtocolSpec p = pa.spec();
    if (p.kind == ProtocolSpec::Kind::parity) throw std::invalid_argument("multimode parity is not supported");
    const auto [rho, dims] = multimode_state(state_json, modes);
    const MultimodeSampler sampler(rho, dims);
    MultimodeRecords recs;
    recs.modes = modes;
    if (p.kind == ProtocolSpec::Kind::homodyne) {
      recs.protocol = Protocol::homodyne;
      recs.samples = sampler.draw_homodyne(rng, T).samples;
    } else {
      recs.protocol = Protocol::pnr;
      recs.samples = sampler.draw_pnr_outcomes(p.params(N), rng, T);
    }
    write_multimode_csv(out, recs);
  } else {
    const ProtocolSpec p = pa.spec();
    const FockOperator rho = make_state(state_from_json(state_json));
    switch (p.kind) {
      case ProtocolSpec::Kind::homodyne:
        write_quadrature_csv(out, draw_homodyne(rho, rng, T));
        break;
      case ProtocolSpec::Kind::pnr:
        write_pnr_csv(out, sample_pnr_outcomes(PnrSampler(rho), p.params(N), rng, T));
        break;
      case ProtocolSpec::Kind::parity:
        write_pnr_csv(out, sample_parity(rho, p.params(N).alpha_max, rng, T));
        break;
    }
  }
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_text_file(out_path, out.str());
  return 0;
}

int cmd_scaling(const std::string& config_path, std::uint64_t seed, int threads, const std::string& out_path) {
  json j = parse_json_arg(config_path);
  j["root_seed"] = seed;
  if (threads >= 0) j["threads"] = threads;
  const ExperimentConfig config = config_from_json(j);
  const ScalingReport report = run_scaling(config);
  const std::string text = to_json(report).dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_text_file(out_path, text);
  for (const auto& r : report.results)
    std::cerr << "N=" << r.N << " min_T=" << (r.min_T ? std::to_string(*r.min_T) : "censored") << "\n";
  if (report.fit) std::cerr << "exponent " << report.fit->p << " +- " << report.fit->p_stderr << "\n";
  return report.any_censored() ? kExitCensored : 0;
}

int cmd_bounds(const std::vector<int>& Ns, double eps, double delta, double r, double C2, double C3,
               const std::string& out_path) {
  std::ostringstream out;
  out << "protocol,N,epsilon,delta,T_bound\n";
  for (const auto& row : bound_table(Ns, eps, delta, HomodyneConstants{1.0, C2, C3}, r))
    out << row.protocol << ',' << row.N << ',' << format_double(row.epsilon) << ',' << format_double(row.delta)
        << ',' << format_double(row.T_bound) << '\n';
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_text_file(out_path, out.str());
  return 0;
}

int cmd_validate(bool full) {
  bool ok = true;
  run_validation(full, [&](const Check& c) {
    ok = ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured " << c.measured << ", limit " << c.limit;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << std::endl;
  });
  return ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical-shadow tomography of bosonic modes"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw measurement records from a simulated state");
  std::string sim_state = R"({"kind":"vacuum"})";
  ProtocolArgs sim_proto;
  bool sim_het = false;
  int sim_N = 4, sim_modes = 1;
  std::size_t sim_T = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--state", sim_state, "state JSON or path to a JSON file")->capture_default_str();
  sim_proto.attach(sim);
  sim->add_flag("--heterodyne", sim_het, "heterodyne records instead of --protocol");
  sim->add_option("--N", sim_N, "cutoff that sets the default disk radius")->capture_default_str();
  sim->add_option("--modes", sim_modes, "number of modes")->capture_default_str();
  sim->add_option("--T", sim_T, "number of shots")->required();
  sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim->add_option("--out,-o", sim_out, "output CSV (default stdout)");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "records to density matrix, Wigner grid and report");
  ProtocolArgs rec_proto;
  int rec_N = 0;
  std::string rec_records, rec_sim, rec_ref, rec_density, rec_wigner, rec_report, rec_patterns;
  std::size_t rec_T = 0;
  std::uint64_t rec_seed = 0;
  rec_proto.attach(rec);
  rec->add_option("--N", rec_N, "Fock cutoff of the estimate")->required();
  auto* src_records = rec->add_option("--records", rec_records, "record CSV file");
  auto* src_sim = rec->add_option("--simulate", rec_sim, "state JSON to simulate instead of reading records");
  src_records->excludes(src_sim);
  rec->add_option("--T", rec_T, "shots for --simulate");
  rec->add_option("--seed", rec_seed, "RNG seed for --simulate");
  rec->add_option("--reference", rec_ref, "density JSON to compare against");
  rec->add_option("--density-out", rec_density, "estimate as density JSON");
  rec->add_option("--wigner-out", rec_wigner, "Wigner CSV of the estimate");
  rec->add_option("--report", rec_report, "report JSON (default stdout)");
  rec->add_option("--pattern-table", rec_patterns, "dump the homodyne pattern-function table");

  // scaling
  auto* sca = app.add_subcommand("scaling", "empirical minimum-T search and exponent fit");
  std::string sca_config, sca_out;
  std::uint64_t sca_seed = 0;
  int sca_threads = -1;
  sca->add_option("--config", sca_config, "experiment config JSON (file or inline)")->required();
  sca->add_option("--seed", sca_seed, "root seed")->required();
  sca->add_option("--threads", sca_threads, "worker threads (0: all cores)");
  sca->add_option("--out,-o", sca_out, "report JSON (default stdout)");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "analytic sample-complexity table");
  std::vector<int> bnd_N = {2, 3, 4, 5, 6};
  double bnd_eps = 0.1, bnd_delta = 0.1, bnd_r = 0.0, bnd_C2 = 1.0, bnd_C3 = 1.0;
  std::string bnd_out;
  bnd->add_option("--N", bnd_N, "cutoffs")->delimiter(',')->capture_default_str();
  bnd->add_option("--epsilon", bnd_eps)->capture_default_str();
  bnd->add_option("--delta", bnd_delta)->capture_default_str();
  bnd->add_option("--r", bnd_r, "T-operator parameter for the pnr rows")->capture_default_str();
  bnd->add_option("--C2", bnd_C2, "homodyne variance constant")->capture_default_str();
  bnd->add_option("--C3", bnd_C3, "homodyne range constant")->capture_default_str();
  bnd->add_option("--out,-o", bnd_out, "output CSV (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "run the oracle and property checks");
  bool val_full = false;
  val->add_flag("--full", val_full, "also run the Monte Carlo reconstructions (minutes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(parse_json_arg(sim_state), sim_proto, sim_het, sim_N, sim_modes, sim_T, sim_seed,
                                  sim_out);
    if (*rec) {
      ReconstructionRequest req;
      req.protocol = rec_proto.spec();
      req.N = rec_N;
      if (!rec_records.empty()) req.records = rec_records;
      if (!rec_sim.empty()) req.simulate_state = parse_json_arg(rec_sim);
      req.T = rec_T;
      req.seed = rec_seed;
      if (!rec_ref.empty()) req.reference = read_density_file(rec_ref);
      req.density_out = rec_density;
      req.wigner_out = rec_wigner;
      req.report_out = rec_report;
      const auto result = run_reconstruction(req);
      if (rec_report.empty()) std::cout << result.report.dump(2) << "\n";
      if (!rec_patterns.empty()) {
        std::ostringstream s;
        write_pattern_table(s, PatternEvaluator(rec_N));
        write_text_file(rec_patterns, s.str());
      }
      return 0;
    }
    if (*sca) return cmd_scaling(sca_config, sca_seed, sca_threads, sca_out);
    if (*bnd) return cmd_bounds(bnd_N, bnd_eps, bnd_delta, bnd_r, bnd_C2, bnd_C3, bnd_out);
    if (*val) return cmd_validate(val_full);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
