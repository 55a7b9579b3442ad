#include "cvshadow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cvshadow/homodyne.hpp"
#include "cvshadow/io.hpp"
#include "cvshadow/multimode.hpp"
#include "cvshadow/quadrature.hpp"

namespace cvshadow {

using nlohmann::json;

// ---------------------------------------------------------------- protocol

TParams ProtocolSpec::params(int N) const {
  if (N < 1) throw std::invalid_argument("protocol: N must be positive");
  TParams p{r, alpha_max > 0.0 ? alpha_max : std::sqrt(region_factor * N)};
  p.validate();
  return p;
}

void ProtocolSpec::validate() const {
  if (!(r > -1.0 && r < 1.0)) throw std::invalid_argument("protocol: r must lie in (-1, 1)");
  if (kind == Kind::parity && r != 0.0) throw std::invalid_argument("protocol: parity needs r = 0");
  if (!(alpha_max >= 0.0) || !std::isfinite(alpha_max))
    throw std::invalid_argument("protocol: alpha_max must be non-negative");
  if (alpha_max == 0.0 && !(region_factor > 0.0 && std::isfinite(region_factor)))
    throw std::invalid_argument("protocol: region_factor must be positive");
}

std::string to_string(ProtocolSpec::Kind kind) {
  switch (kind) {
    case ProtocolSpec::Kind::homodyne:
      return "homodyne";
    case ProtocolSpec::Kind::pnr:
      return "pnr";
    case ProtocolSpec::Kind::parity:
      return "parity";
  }
  return "?";
}

ProtocolSpec::Kind protocol_kind(const std::string& name) {
  if (name == "homodyne") return ProtocolSpec::Kind::homodyne;
  if (name == "pnr") return ProtocolSpec::Kind::pnr;
  if (name == "parity") return ProtocolSpec::Kind::parity;
  throw std::invalid_argument("unknown protocol '" + name + "' (homodyne, pnr, parity)");
}

json to_json(const ProtocolSpec& p) {
  json j = {{"kind", to_string(p.kind)}};
  if (p.kind != ProtocolSpec::Kind::homodyne) {
    j["r"] = p.r;
    if (p.alpha_max > 0.0)
      j["alpha_max"] = p.alpha_max;
    else
      j["region_factor"] = p.region_factor;
  }
  return j;
}

ProtocolSpec protocol_from_json(const json& j) {
  ProtocolSpec p;
  if (j.is_string()) {
    p.kind = protocol_kind(j.get<std::string>());
  } else {
    if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("protocol: missing 'kind'");
    p.kind = protocol_kind(j.at("kind").get<std::string>());
    p.r = j.value("r", 0.0);
    p.alpha_max = j.value("alpha_max", 0.0);
    p.region_factor = j.value("region_factor", 4.0);
  }
  p.validate();
  return p;
}

// ------------------------------------------------------------------- state

StateSpec state_from_json(const json& j, int min_cutoff) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("state: missing 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const Complex alpha(j.value("alpha_re", 0.0), j.value("alpha_im", 0.0));
  const int given = j.value("cutoff", 0);
  const auto cutoff = [&](int natural) { return std::max({given > 0 ? given : natural, min_cutoff, 1}); };
  if (kind == "vacuum") return {states::Vacuum{}, cutoff(1)};
  if (kind == "fock") {
    const int n = j.value("n", 0);
    return {states::Fock{n}, cutoff(n + 1)};
  }
  if (kind == "coherent") return {states::Coherent{alpha}, cutoff(suggested_cutoff(alpha))};
  if (kind == "cat") return {states::Cat{alpha, j.value("odd", false)}, cutoff(suggested_cutoff(alpha))};
  if (kind == "random_pure") {
    if (given < 1) throw std::invalid_argument("state: random_pure needs 'cutoff'");
    return {states::RandomPure{j.value("seed", std::uint64_t{0})}, cutoff(given)};
  }
  if (kind == "density") {
    if (!j.contains("density")) throw std::invalid_argument("state: 'density' object missing");
    std::istringstream in(j.at("density").dump());
    const FockOperator op = read_density_json(in, "state.density");
    return {states::Custom{op.matrix()}, cutoff(op.dim())};
  }
  throw std::invalid_argument("state: unknown kind '" + kind + "'");
}

// ------------------------------------------------------------------ config

void ExperimentConfig::validate() const {
  protocol.validate();
  if (N_list.empty()) throw std::invalid_argument("config: N_list is empty");
  for (int N : N_list)
    if (N < 1) throw std::invalid_argument("config: N values must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must lie in (0, 1)");
  if (trials_per_T < 20) throw std::invalid_argument("config: trials_per_T must be at least 20");
  if (search.T_min < 1 || search.T_max < search.T_min)
    throw std::invalid_argument("config: need 1 <= T_min <= T_max");
  if (!(search.growth > 1.0)) throw std::invalid_argument("config: growth factor must exceed 1");
  if (!(search.resolution > 0.0)) throw std::invalid_argument("config: resolution must be positive");
  if (threads < 0) throw std::invalid_argument("config: threads must be non-negative");
  state_from_json(state);
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  if (j.contains("state")) c.state = j.at("state");
  if (j.contains("protocol")) c.protocol = protocol_from_json(j.at("protocol"));
  if (j.contains("N_list")) c.N_list = j.at("N_list").get<std::vector<int>>();
  c.epsilon = j.value("epsilon", c.epsilon);
  c.delta = j.value("delta", c.delta);
  c.trials_per_T = j.value("trials_per_T", c.trials_per_T);
  if (j.contains("T_search")) {
    const auto& s = j.at("T_search");
    c.search.T_min = s.value("T_min", c.search.T_min);
    c.search.T_max = s.value("T_max", c.search.T_max);
    c.search.growth = s.value("growth", c.search.growth);
    c.search.resolution = s.value("resolution", c.search.resolution);
  }
  c.root_seed = j.value("root_seed", c.root_seed);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"state", c.state},
          {"protocol", to_json(c.protocol)},
          {"N_list", c.N_list},
          {"epsilon", c.epsilon},
          {"delta", c.delta},
          {"trials_per_T", c.trials_per_T},
          {"T_search",
           {{"T_min", c.search.T_min},
            {"T_max", c.search.T_max},
            {"growth", c.search.growth},
            {"resolution", c.search.resolution}}},
          {"root_seed", c.root_seed}};
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0 || k > n) throw std::invalid_argument("wilson_interval: need 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

// ------------------------------------------------------------------ trials

namespace {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(count, threads > 0 ? threads
                                                               : static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Draws shots of one protocol into a running snapshot sum.
class Source {
 public:
  virtual ~Source() = default;
  virtual void extend(Matrix& sum, Rng& rng, std::size_t shots) const = 0;
};

class HomodyneSource : public Source {
 public:
  HomodyneSource(const FockOperator& rho, int N) : sampler_(rho), evaluator_(N), N_(N) {}
  void extend(Matrix& sum, Rng& rng, std::size_t shots) const override {
    const HomodyneSnapshots builder(evaluator_, N_);
    for (std::size_t i = 0; i < shots; ++i) {
      const double theta = kPi * rng.uniform();
      builder.add_to(sum, {theta, sampler_.sample_x(theta, rng)});
    }
  }

 private:
  QuadratureSampler sampler_;
  PatternEvaluator evaluator_;
  int N_;
};

class PnrSource : public Source {
 public:
  PnrSource(const FockOperator& rho, const TParams& params, int N, bool parity)
      : sampler_(rho), params_(params), N_(N), parity_(parity) {}
  void extend(Matrix& sum, Rng& rng, std::size_t shots) const override {
    const PnrSnapshots builder(params_, N_, parity_);
    for (std::size_t i = 0; i < shots; ++i) {
      const Complex alpha = sample_disk(params_.alpha_max, rng);
      const int n = parity_ ? sampler_.sample_parity(alpha, rng) : sampler_.sample_n(alpha, N_, rng);
      if (n >= 0) builder.add_to(sum, {n, alpha});
    }
  }

 private:
  PnrSampler sampler_;
  TParams params_;
  int N_;
  bool parity_;
};

std::unique_ptr<Source> make_source(const ProtocolSpec& protocol, const FockOperator& rho, int N) {
  switch (protocol.kind) {
    case ProtocolSpec::Kind::homodyne:
      return std::make_unique<HomodyneSource>(rho, N);
    case ProtocolSpec::Kind::pnr:
      return std::make_unique<PnrSource>(rho, protocol.params(N), N, false);
    case ProtocolSpec::Kind::parity:
      return std::make_unique<PnrSource>(rho, protocol.params(N), N, true);
  }
  throw std::logic_error("make_source: unknown protocol");
}

struct Checkpoint {
  std::size_t T;
  Matrix sum;
  Rng rng;
};

}  // namespace

struct TrialSet::Impl {
  ExperimentConfig config;
  int N;
  FockOperator target;
  std::unique_ptr<Source> source;
  std::vector<std::vector<Checkpoint>> trials;  // sorted by T
};

TrialSet::TrialSet(const ExperimentConfig& config, int N) : impl_(std::make_unique<Impl>()) {
  config.validate();
  int largest = N;
  for (int n : config.N_list) largest = std::max(largest, n);
  const FockOperator rho = make_state(state_from_json(config.state, largest));
  impl_->config = config;
  impl_->N = N;
  impl_->target = project(rho, N);
  impl_->source = make_source(config.protocol, rho, N);
  impl_->trials.resize(config.trials_per_T);
  for (int i = 0; i < config.trials_per_T; ++i)
    impl_->trials[i].push_back({0, Matrix::Zero(N, N), Rng(config.root_seed, stream(N, i))});
}

TrialSet::~TrialSet() = default;

const FockOperator& TrialSet::target() const { return impl_->target; }

Evaluation TrialSet::evaluate(std::size_t T) {
  if (T == 0) throw std::invalid_argument("evaluate: T must be positive");
  Impl& im = *impl_;
  const int count = static_cast<int>(im.trials.size());
  Evaluation ev;
  ev.T = T;
  ev.trials = static_cast<std::size_t>(count);
  ev.errors.assign(count, 0.0);
  parallel_for(count, im.config.threads, [&](int i) {
    auto& cps = im.trials[i];
    auto it = std::upper_bound(cps.begin(), cps.end(), T,
                               [](std::size_t t, const Checkpoint& c) { return t < c.T; });
    const Checkpoint& from = *std::prev(it);
    Checkpoint next{T, from.sum, from.rng};
    im.source->extend(next.sum, next.rng, T - from.T);
    ev.errors[i] = infinity_norm(next.sum / static_cast<double>(T) - im.target.matrix());
    if (from.T != T) cps.insert(it, std::move(next));
  });
  for (double e : ev.errors) ev.failures += e > im.config.epsilon;
  ev.delta_hat = static_cast<double>(ev.failures) / count;
  std::tie(ev.ci_low, ev.ci_high) = wilson_interval(ev.failures, ev.trials);
  return ev;
}

MinTResult find_min_T(const ExperimentConfig& config, int N) {
  TrialSet trials(config, N);
  MinTResult out;
  out.N = N;
  const auto& s = config.search;
  const auto passes = [&](std::size_t T) {
    out.evaluations.push_back(trials.evaluate(T));
    return out.evaluations.back().delta_hat <= config.delta;
  };

  std::size_t lo = 0;
  std::size_t hi = s.T_min;
  while (!passes(hi)) {
    lo = hi;
    if (hi >= s.T_max) {
      out.censored = true;
      break;
    }
    hi = std::min(s.T_max, static_cast<std::size_t>(std::ceil(static_cast<double>(hi) * s.growth)));
  }
  if (!out.censored) {
    out.at_lower_bound = lo == 0;
    while (lo > 0 && static_cast<double>(hi - lo) > std::max(1.0, s.resolution * static_cast<double>(lo))) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (passes(mid))
        hi = mid;
      else
        lo = mid;
    }
    out.min_T = hi;
  }
  std::sort(out.evaluations.begin(), out.evaluations.end(),
            [](const Evaluation& a, const Evaluation& b) { return a.T < b.T; });
  return out;
}

// --------------------------------------------------------------------- fit

FitResult fit_exponent(const std::vector<std::pair<double, double>>& N_T) {
  const std::size_t n = N_T.size();
  if (n < 3) throw std::invalid_argument("fit_exponent: need at least three points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(N_T[i].first > 0.0) || !(N_T[i].second > 0.0))
      throw std::invalid_argument("fit_exponent: N and T must be positive");
    x[i] = std::log(N_T[i].first);
    y[i] = std::log(N_T[i].second);
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i] / n;
    ybar += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
    syy += (y[i] - ybar) * (y[i] - ybar);
  }
  if (sxx <= 1e-300) throw std::invalid_argument("fit_exponent: all N are equal");
  FitResult f;
  f.p = sxy / sxx;
  f.intercept = ybar - f.p * xbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f.residuals.push_back(y[i] - f.intercept - f.p * x[i]);
    sse += f.residuals.back() * f.residuals.back();
  }
  const double s2 = sse / static_cast<double>(n - 2);
  f.p_stderr = std::sqrt(s2 / sxx);
  f.intercept_stderr = std::sqrt(s2 * (1.0 / n + xbar * xbar / sxx));
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

// ----------------------------------------------------------------- scaling

bool ScalingReport::any_censored() const {
  return std::any_of(results.begin(), results.end(), [](const MinTResult& r) { return r.censored; });
}

ScalingReport run_scaling(const ExperimentConfig& config) {
  config.validate();
  ScalingReport report;
  report.config = config;
  report.started = utc_timestamp();
  std::vector<std::pair<double, double>> points;
  for (int N : config.N_list) {
    report.results.push_back(find_min_T(config, N));
    const auto& r = report.results.back();
    if (r.min_T) points.emplace_back(N, static_cast<double>(*r.min_T));
  }
  std::sort(points.begin(), points.end());
  const bool distinct = points.size() >= 2 && points.front().first != points.back().first;
  if (points.size() >= 3 && distinct) report.fit = fit_exponent(points);
  report.finished = utc_timestamp();
  return report;
}

json to_json(const ScalingReport& r) {
  json results = json::array();
  for (const auto& m : r.results) {
    json evals = json::array();
    for (const auto& e : m.evaluations)
      evals.push_back({{"T", e.T},
                       {"failures", e.failures},
                       {"trials", e.trials},
                       {"delta_hat", e.delta_hat},
                       {"wilson_low", e.ci_low},
                       {"wilson_high", e.ci_high},
                       {"errors", e.errors}});
    results.push_back({{"N", m.N},
                       {"min_T", m.min_T ? json(*m.min_T) : json(nullptr)},
                       {"censored", m.censored},
                       {"at_lower_bound", m.at_lower_bound},
                       {"evaluations", evals}});
  }
  json j = {{"schema_version", kReportSchemaVersion},
            {"kind", "scaling"},
            {"config", to_json(r.config)},
            {"results", results},
            {"started", r.started},
            {"finished", r.finished}};
  if (r.fit)
    j["fit"] = {{"exponent", r.fit->p},
                {"exponent_stderr", r.fit->p_stderr},
                {"intercept", r.fit->intercept},
                {"intercept_stderr", r.fit->intercept_stderr},
                {"r_squared", r.fit->r_squared},
                {"residuals", r.fit->residuals}};
  else
    j["fit"] = nullptr;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------- reconstruction

namespace {

enum class RecordKind { quadrature, pnr, multimode };

RecordKind sniff(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    if (line.compare(start, 5, "mode0") == 0) return RecordKind::multimode;
    if (line.compare(start, 5, "theta") == 0) return RecordKind::quadrature;
    if (line.compare(start, 1, "n") == 0) return RecordKind::pnr;
    throw ParseError(path.string(), number, "unrecognized record header");
  }
  throw ParseError(path.string(), 0, "empty file");
}

void check_disk(std::span<const PnrSample> samples, double alpha_max) {
  for (const auto& s : samples)
    if (std::abs(s.alpha) > alpha_max * (1.0 + 1e-12))
      throw std::domain_error("records: displacement outside the configured disk (alpha_max = " +
                              format_double(alpha_max) + ")");
}

// Projects each of `modes` modes of dimension d = dim^(1/modes) to N levels.
FockOperator project_modes(const FockOperator& op, int modes, int N) {
  const int d = static_cast<int>(std::lround(std::pow(op.dim(), 1.0 / modes)));
  long full = 1, small = 1;
  for (int k = 0; k < modes; ++k) {
    full *= d;
    small *= N;
  }
  if (full != op.dim() || d < N)
    throw std::invalid_argument("reference: dimension is not (d >= N)^modes");
  Matrix out(small, small);
  std::vector<int> digits(modes);
  const auto index = [&](long i) {
    long r = 0;
    for (int k = 0; k < modes; ++k) {
      long p = 1;
      for (int q = k + 1; q < modes; ++q) p *= N;
      r = r * d + (i / p) % N;
    }
    return r;
  };
  for (long i = 0; i < small; ++i)
    for (long j = 0; j < small; ++j) out(i, j) = op(static_cast<int>(index(i)), static_cast<int>(index(j)));
  return FockOperator(std::move(out));
}

}  // namespace

ReconstructionResult run_reconstruction(const ReconstructionRequest& req) {
  req.protocol.validate();
  if (req.N < 1) throw std::invalid_argument("reconstruct: N must be positive");
  if (req.records.has_value() == req.simulate_state.has_value())
    throw std::invalid_argument("reconstruct: give exactly one of a record file or a simulated state");
  const int N = req.N;
  const auto kind = req.protocol.kind;
  json report = {{"schema_version", kReportSchemaVersion},
                 {"kind", "reconstruction"},
                 {"protocol", to_json(req.protocol)},
                 {"N", N}};

  std::optional<FockOperator> reference = req.reference;
  Shadow shadow(1);
  int modes = 1;
  std::size_t discarded = 0;

  std::vector<HomodyneSample> homodyne;
  std::vector<PnrSample> pnr;
  if (req.simulate_state) {
    if (req.T == 0) throw std::invalid_argument("reconstruct: empty sample set (T = 0)");
    const FockOperator rho = make_state(state_from_json(*req.simulate_state, N));
    if (!reference) reference = rho;
    Rng rng(req.seed);
    if (kind == ProtocolSpec::Kind::homodyne)
      homodyne = draw_homodyne(rho, rng, req.T);
    else if (kind == ProtocolSpec::Kind::pnr)
      pnr = sample_pnr_outcomes(PnrSampler(rho), req.protocol.params(N), rng, req.T);
    else
      pnr = sample_parity(rho, req.protocol.params(N).alpha_max, rng, req.T);
    report["source"] = {{"simulated", *req.simulate_state}, {"T", req.T}, {"seed", req.seed}};
  } else {
    const auto& path = *req.records;
    report["source"] = {{"records", path.string()}};
    switch (sniff(path)) {
      case RecordKind::quadrature:
        if (kind != ProtocolSpec::Kind::homodyne)
          throw std::invalid_argument("reconstruct: quadrature records need the homodyne protocol");
        homodyne = ingest_quadrature(path);
        break;
      case RecordKind::pnr:
        if (kind == ProtocolSpec::Kind::homodyne)
          throw std::invalid_argument("reconstruct: photon-count records need the pnr or parity protocol");
        pnr = ingest_pnr(path);
        break;
      case RecordKind::multimode: {
        std::ifstream in(path);
        const auto recs = read_multimode_csv(in, path.string());
        modes = recs.modes;
        if ((recs.protocol == Protocol::homodyne) != (kind == ProtocolSpec::Kind::homodyne) ||
            kind == ProtocolSpec::Kind::parity)
          throw std::invalid_argument("reconstruct: multimode records do not match the protocol");
        if (kind == ProtocolSpec::Kind::homodyne) {
          const PatternEvaluator ev(N);
          shadow = multimode_shadow(recs.samples, ModeSnapshots(ev, N));
        } else {
          const TParams params = req.protocol.params(N);
          for (const auto& shot : recs.samples)
            for (const auto& m : shot.per_mode) check_disk(std::span(&std::get<PnrSample>(m), 1), params.alpha_max);
          const auto draw = filter_pnr(recs.samples, N);
          discarded = draw.discarded;
          if (draw.samples.empty()) throw std::domain_error("reconstruct: every shot was discarded");
          shadow = multimode_shadow(draw.samples, ModeSnapshots(params, N), draw.discarded);
        }
        report["shots"] = recs.samples.size();
        break;
      }
    }
  }

  if (modes == 1) {
    if (kind == ProtocolSpec::Kind::homodyne) {
      const PatternEvaluator ev(N);
      shadow = homodyne_shadow(homodyne, ev, N);
      const auto sum = summarize(std::span<const HomodyneSample>(homodyne));
      report["summary"] = {{"count", sum.count},
                           {"theta_histogram", sum.theta_histogram},
                           {"x_min", sum.x_min},
                           {"x_max", sum.x_max}};
      report["shots"] = homodyne.size();
    } else {
      const TParams params = req.protocol.params(N);
      check_disk(pnr, params.alpha_max);
      const auto sum = summarize(std::span<const PnrSample>(pnr));
      report["summary"] = {{"count", sum.count},
                           {"n_histogram", sum.n_histogram},
                           {"alpha_abs_max", sum.alpha_abs_max}};
      report["shots"] = pnr.size();
      if (kind == ProtocolSpec::Kind::pnr) {
        const auto draw = filter_pnr(pnr, N);
        discarded = draw.discarded;
        shadow = pnr_shadow(draw, params, N);
      } else {
        std::vector<PnrSample> bits(pnr);
        for (auto& b : bits) b.n %= 2;
        shadow = parity_shadow(bits, params.alpha_max, N);
      }
    }
  }
  report["modes"] = modes;
  report["discarded"] = discarded;

  ReconstructionResult result;
  result.estimate = shadow.estimate();
  report["trace"] = result.estimate.trace();
  report["min_eigenvalue"] = result.estimate.min_eigenvalue();
  if (reference) {
    const FockOperator target = modes == 1 ? [&] {
      if (reference->dim() < N) throw std::invalid_argument("reconstruct: reference dimension below N");
      return project(*reference, N);
    }()
                                           : project_modes(*reference, modes, N);
    result.error = infinity_norm(result.estimate.matrix() - target.matrix());
    report["error_inf"] = *result.error;
  } else {
    report["error_inf"] = nullptr;
  }
  report["created"] = utc_timestamp();

  if (!req.density_out.empty()) {
    std::ostringstream s;
    write_density_json(s, result.estimate);
    write_text_file(req.density_out, s.str());
  }
  if (!req.wigner_out.empty()) {
    if (modes != 1) throw std::invalid_argument("reconstruct: Wigner output is single-mode only");
    std::ostringstream s;
    write_wigner_csv(s, wigner(result.estimate, WignerGridSpec::covering(N)));
    write_text_file(req.wigner_out, s.str());
  }
  if (!req.report_out.empty()) write_text_file(req.report_out, report.dump(2) + "\n");
  result.report = std::move(report);
  return result;
}

}  // namespace cvshadow
