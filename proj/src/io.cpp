#include "cvshadow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace cvshadow {

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

// Data lines of a record CSV after the header.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Reads the header; returns its fields.
  std::vector<std::string> header() {
    std::vector<std::string_view> f;
    if (!next(f)) throw ParseError(source_, 0, "empty file");
    return {f.begin(), f.end()};
  }

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++number_;
      const std::string_view t = trim(line_);
      if (t.empty() || t.front() == '#') continue;
      fields = split(t);
      return true;
    }
    return false;
  }

  int line() const { return number_; }
  const std::string& source() const { return source_; }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, number_, message); }

  double real(std::string_view field, const char* name) const {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      fail(std::string("cannot parse ") + name + " '" + std::string(field) + "'");
    if (!std::isfinite(v)) fail(std::string(name) + " is not finite");
    return v;
  }

  int integer(std::string_view field, const char* name) const {
    int v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      fail(std::string("cannot parse ") + name + " '" + std::string(field) + "'");
    return v;
  }

  void expect_fields(const std::vector<std::string_view>& f, std::size_t n) const {
    if (f.size() != n)
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(f.size()));
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  int number_ = 0;
};

void expect_header(CsvReader& r, const std::vector<std::string>& want) {
  const auto got = r.header();
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    r.fail("expected header '" + joined + "'");
  }
}

HomodyneSample parse_homodyne(const CsvReader& r, std::string_view t, std::string_view x) {
  HomodyneSample s{r.real(t, "theta"), r.real(x, "x")};
  if (!(s.theta >= 0.0 && s.theta < kPi)) r.fail("theta outside [0, pi)");
  return s;
}

PnrSample parse_pnr(const CsvReader& r, std::string_view n, std::string_view re, std::string_view im) {
  PnrSample s{r.integer(n, "n"), Complex(r.real(re, "alpha_re"), r.real(im, "alpha_im"))};
  if (s.n < 0) r.fail("negative photon number");
  return s;
}

void require_rows(const CsvReader& r, std::size_t rows) {
  if (rows == 0) throw ParseError(r.source(), r.line(), "no records");
}

nlohmann::json matrix_json(const Matrix& m, bool imag) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(imag ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_density_json(std::ostream& out, const FockOperator& op) {
  nlohmann::json j;
  j["dim"] = op.dim();
  j["re"] = matrix_json(op.matrix(), false);
  j["im"] = matrix_json(op.matrix(), true);
  out << j.dump() << '\n';
}

FockOperator read_density_json(std::istream& in, const std::string& source) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer())
    throw ParseError(source, 0, "missing integer field 'dim'");
  const long dim = j["dim"].get<long>();
  if (dim < 1 || dim > 100000) throw ParseError(source, 0, "'dim' must be positive");
  Matrix m(dim, dim);
  for (const char* part : {"re", "im"}) {
    const bool imag = part[0] == 'i';
    if (!j.contains(part) || !j[part].is_array() || static_cast<long>(j[part].size()) != dim)
      throw ParseError(source, 0, std::string("'") + part + "' must be a dim x dim array");
    for (long r = 0; r < dim; ++r) {
      const auto& row = j[part][r];
      if (!row.is_array() || static_cast<long>(row.size()) != dim)
        throw ParseError(source, 0, std::string("'") + part + "' row " + std::to_string(r) + " has the wrong length");
      for (long c = 0; c < dim; ++c) {
        if (!row[c].is_number()) throw ParseError(source, 0, std::string("'") + part + "' has a non-numeric entry");
        const double v = row[c].get<double>();
        if (imag)
          m(r, c).imag(v);
        else
          m(r, c) = Complex(v, 0.0);
      }
    }
  }
  try {
    return FockOperator(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  out << "q,p,w\n";
  for (std::size_t i = 0; i < grid.q.size(); ++i)
    for (std::size_t j = 0; j < grid.p.size(); ++j)
      out << format_double(grid.q[i]) << ',' << format_double(grid.p[j]) << ','
          << format_double(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
}

void write_quadrature_csv(std::ostream& out, std::span<const HomodyneSample> samples) {
  out << "theta,x\n";
  for (const auto& s : samples) out << format_double(s.theta) << ',' << format_double(s.x) << '\n';
}

std::vector<HomodyneSample> read_quadrature_csv(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  expect_header(r, {"theta", "x"});
  std::vector<HomodyneSample> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    r.expect_fields(f, 2);
    out.push_back(parse_homodyne(r, f[0], f[1]));
  }
  require_rows(r, out.size());
  return out;
}

void write_pnr_csv(std::ostream& out, std::span<const PnrSample> samples) {
  out << "n,alpha_re,alpha_im\n";
  for (const auto& s : samples)
    out << s.n << ',' << format_double(s.alpha.real()) << ',' << format_double(s.alpha.imag()) << '\n';
}

std::vector<PnrSample> read_pnr_csv(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  expect_header(r, {"n", "alpha_re", "alpha_im"});
  std::vector<PnrSample> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    r.expect_fields(f, 3);
    out.push_back(parse_pnr(r, f[0], f[1], f[2]));
  }
  require_rows(r, out.size());
  return out;
}

void write_heterodyne_csv(std::ostream& out, std::span<const Complex> samples) {
  out << "alpha_re,alpha_im\n";
  for (const auto& a : samples) out << format_double(a.real()) << ',' << format_double(a.imag()) << '\n';
}

std::vector<Complex> read_heterodyne_csv(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  expect_header(r, {"alpha_re", "alpha_im"});
  std::vector<Complex> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    r.expect_fields(f, 2);
    out.emplace_back(r.real(f[0], "alpha_re"), r.real(f[1], "alpha_im"));
  }
  require_rows(r, out.size());
  return out;
}

namespace {

std::vector<std::string> multimode_header(Protocol protocol, int modes) {
  std::vector<std::string> h;
  for (int k = 0; k < modes; ++k) {
    const std::string m = "mode" + std::to_string(k) + "_";
    if (protocol == Protocol::homodyne) {
      h.push_back(m + "theta");
      h.push_back(m + "x");
    } else {
      h.push_back(m + "n");
      h.push_back(m + "alpha_re");
      h.push_back(m + "alpha_im");
    }
  }
  return h;
}

}  // namespace

void write_multimode_csv(std::ostream& out, const MultimodeRecords& records) {
  if (records.modes < 1) throw std::invalid_argument("write_multimode_csv: no modes");
  const auto header = multimode_header(records.protocol, records.modes);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& shot : records.samples) {
    if (static_cast<int>(shot.per_mode.size()) != records.modes)
      throw std::invalid_argument("write_multimode_csv: shot has the wrong mode count");
    for (int k = 0; k < records.modes; ++k) {
      if (k) out << ',';
      const auto& m = shot.per_mode[k];
      if (records.protocol == Protocol::homodyne) {
        const auto& s = std::get<HomodyneSample>(m);
        out << format_double(s.theta) << ',' << format_double(s.x);
      } else {
        const auto& s = std::get<PnrSample>(m);
        out << s.n << ',' << format_double(s.alpha.real()) << ',' << format_double(s.alpha.imag());
      }
    }
    out << '\n';
  }
}

MultimodeRecords read_multimode_csv(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  const auto header = r.header();
  MultimodeRecords out;
  if (header.size() >= 2 && header.size() % 2 == 0 &&
      header == multimode_header(Protocol::homodyne, static_cast<int>(header.size() / 2))) {
    out.protocol = Protocol::homodyne;
    out.modes = static_cast<int>(header.size() / 2);
  } else if (header.size() >= 3 && header.size() % 3 == 0 &&
             header == multimode_header(Protocol::pnr, static_cast<int>(header.size() / 3))) {
    out.protocol = Protocol::pnr;
    out.modes = static_cast<int>(header.size() / 3);
  } else {
    r.fail("expected a mode0_theta,mode0_x,... or mode0_n,mode0_alpha_re,mode0_alpha_im,... header");
  }
  std::vector<std::string_view> f;
  while (r.next(f)) {
    r.expect_fields(f, header.size());
    MultimodeSample shot;
    for (int k = 0; k < out.modes; ++k) {
      if (out.protocol == Protocol::homodyne)
        shot.per_mode.emplace_back(parse_homodyne(r, f[2 * k], f[2 * k + 1]));
      else
        shot.per_mode.emplace_back(parse_pnr(r, f[3 * k], f[3 * k + 1], f[3 * k + 2]));
    }
    out.samples.push_back(std::move(shot));
  }
  require_rows(r, out.samples.size());
  return out;
}

void write_pattern_table(std::ostream& out, const PatternEvaluator& evaluator) {
  out << "m,n,x,f\n";
  const auto& grid = evaluator.grid();
  for (int n = 0; n < evaluator.cutoff(); ++n)
    for (int m = 0; m <= n; ++m)
      for (int i = 0; i < grid.points; ++i)
        out << m << ',' << n << ',' << format_double(grid.at(i)) << ','
            << format_double(evaluator.table(m, n, i)) << '\n';
}

QuadratureSummary summarize(std::span<const HomodyneSample> samples, int theta_bins) {
  if (theta_bins < 1) throw std::invalid_argument("summarize: need at least one bin");
  QuadratureSummary out;
  out.count = samples.size();
  out.theta_histogram.assign(theta_bins, 0);
  if (samples.empty()) return out;
  out.x_min = out.x_max = samples[0].x;
  for (const auto& s : samples) {
    const int b = std::min(theta_bins - 1, static_cast<int>(s.theta / kPi * theta_bins));
    ++out.theta_histogram[std::max(b, 0)];
    out.x_min = std::min(out.x_min, s.x);
    out.x_max = std::max(out.x_max, s.x);
  }
  return out;
}

PnrSummary summarize(std::span<const PnrSample> samples) {
  PnrSummary out;
  out.count = samples.size();
  for (const auto& s : samples) {
    if (s.n < 0) throw std::invalid_argument("summarize: negative photon number");
    if (static_cast<std::size_t>(s.n) >= out.n_histogram.size()) out.n_histogram.resize(s.n + 1, 0);
    ++out.n_histogram[s.n];
    out.alpha_abs_max = std::max(out.alpha_abs_max, std::abs(s.alpha));
  }
  return out;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<HomodyneSample> ingest_quadrature(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_quadrature_csv(in, path.string());
}

std::vector<PnrSample> ingest_pnr(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pnr_csv(in, path.string());
}

FockOperator read_density_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_density_json(in, path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace cvshadow
