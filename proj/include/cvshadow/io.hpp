#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvshadow/displaced.hpp"
#include "cvshadow/fock.hpp"
#include "cvshadow/homodyne.hpp"
#include "cvshadow/multimode.hpp"
#include "cvshadow/quadrature.hpp"

namespace cvshadow {

/// Malformed input. what() reads "<source>:<line>: <message>"; line is 0
/// when the problem is not tied to a line (empty file, bad JSON shape).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

// Density matrices: {"dim": N, "re": [[...]], "im": [[...]]}, row-major.
void write_density_json(std::ostream& out, const FockOperator& op);
FockOperator read_density_json(std::istream& in, const std::string& source = "<density>");

/// "q,p,w", q outer, p inner.
void write_wigner_csv(std::ostream& out, const WignerGrid& grid);

// Record files. Readers skip blank lines and lines starting with '#', and
// require the exact header as the first other line.
void write_quadrature_csv(std::ostream& out, std::span<const HomodyneSample> samples);
std::vector<HomodyneSample> read_quadrature_csv(std::istream& in,
                                                const std::string& source = "<quadrature>");

/// "n,alpha_re,alpha_im" with full photon counts.
void write_pnr_csv(std::ostream& out, std::span<const PnrSample> samples);
std::vector<PnrSample> read_pnr_csv(std::istream& in, const std::string& source = "<pnr>");

void write_heterodyne_csv(std::ostream& out, std::span<const Complex> samples);
std::vector<Complex> read_heterodyne_csv(std::istream& in, const std::string& source = "<heterodyne>");

struct MultimodeRecords {
  Protocol protocol = Protocol::homodyne;
  int modes = 0;
  std::vector<MultimodeSample> samples;
};

/// "mode0_theta,mode0_x,mode1_theta,..." or "mode0_n,mode0_alpha_re,mode0_alpha_im,...".
void write_multimode_csv(std::ostream& out, const MultimodeRecords& records);
MultimodeRecords read_multimode_csv(std::istream& in, const std::string& source = "<multimode>");

/// Tabulated pattern functions as "m,n,x,f", m <= n, one row per grid node.
void write_pattern_table(std::ostream& out, const PatternEvaluator& evaluator);

struct QuadratureSummary {
  std::size_t count = 0;
  std::vector<std::size_t> theta_histogram;  // equal bins over [0, pi)
  double x_min = 0.0;
  double x_max = 0.0;
};
QuadratureSummary summarize(std::span<const HomodyneSample> samples, int theta_bins = 10);

struct PnrSummary {
  std::size_t count = 0;
  std::vector<std::size_t> n_histogram;  // index n, up to the largest count seen
  double alpha_abs_max = 0.0;
};
PnrSummary summarize(std::span<const PnrSample> samples);

// File wrappers; I/O failures throw std::runtime_error naming the path.
std::vector<HomodyneSample> ingest_quadrature(const std::filesystem::path& path);
std::vector<PnrSample> ingest_pnr(const std::filesystem::path& path);
FockOperator read_density_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace cvshadow
