#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cvshadow/displaced.hpp"
#include "cvshadow/homodyne.hpp"

namespace cvshadow {

using ModeOutcome = std::variant<HomodyneSample, PnrSample>;

/// One joint shot: an outcome per mode, mode 0 first.
struct MultimodeSample {
  std::vector<ModeOutcome> per_mode;
};

enum class Protocol { homodyne, pnr };

/// Strictly increasing list of mode indices.
struct ModeSubset {
  std::vector<int> modes;
  void validate(int mode_count) const;
};

struct MultimodeDraw {
  std::vector<MultimodeSample> samples;
  std::size_t discarded = 0;  // shots where some mode returned n >= N

  std::size_t total() const { return samples.size() + discarded; }
  double discard_fraction() const {
    return total() == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(total());
  }
};

/// Joint sampling of local measurements on an M-mode state.
///
/// The state is split into pure components; a shot picks one by weight and
/// then samples the modes in order, each from the reduced state of the
/// remaining modes conditioned on the outcomes so far. Mode 0 is the most
/// significant index of the Kronecker ordering.
class MultimodeSampler {
 public:
  MultimodeSampler(const FockOperator& rho, std::vector<int> dims, int grid_points = 4096);

  int modes() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }

  MultimodeDraw draw_homodyne(Rng& rng, std::size_t count) const;
  /// A shot is discarded as soon as one mode reports n >= N.
  MultimodeDraw draw_pnr(const TParams& params, int N, Rng& rng, std::size_t count) const;
  /// Full photon counts per mode (capped by pnr_record_cap), nothing discarded.
  std::vector<MultimodeSample> draw_pnr_outcomes(const TParams& params, Rng& rng,
                                                 std::size_t count) const;

 private:
  const Vector& pick_component(Rng& rng) const;
  MultimodeDraw pnr_shots(const TParams& params, int limit, bool discard, Rng& rng,
                          std::size_t count) const;

  std::vector<int> dims_;
  std::vector<Vector> components_;  // sqrt(weight) * eigenvector
  std::vector<double> cumulative_;
  std::vector<ConditionalQuadratureSampler> quadrature_;  // one per mode
};

/// Shots with n >= N on any mode become discards.
MultimodeDraw filter_pnr(std::span<const MultimodeSample> records, int N);

/// Single-mode snapshot builder for one protocol, shared by every mode.
class ModeSnapshots {
 public:
  ModeSnapshots(const PatternEvaluator& evaluator, int N);
  ModeSnapshots(const TParams& params, int N);

  Protocol protocol() const { return protocol_; }
  int dim() const { return N_; }

  /// N x N snapshot; throws std::invalid_argument when the outcome belongs
  /// to the other protocol.
  Matrix snapshot(const ModeOutcome& outcome) const;

 private:
  Protocol protocol_;
  int N_;
  const PatternEvaluator* evaluator_ = nullptr;
  TParams params_;
};

/// Tensor product of the per-mode snapshots, N^M dimensional.
FockOperator multimode_snapshot(const MultimodeSample& sample, const ModeSnapshots& builder);

/// Mean of full tensor snapshots. Discarded shots count towards the size.
Shadow multimode_shadow(std::span<const MultimodeSample> samples, const ModeSnapshots& builder,
                        std::size_t discarded = 0);

/// k-local estimate: mean over shots of the tensor product of the snapshots
/// of the listed modes only (the other modes are ignored, not traced).
Shadow reduced_shadow(std::span<const MultimodeSample> samples, const ModeSubset& subset,
                      const ModeSnapshots& builder, std::size_t discarded = 0);

/// |cat> (x) |cat> with even cats, or the entangled (|a,a> + |-a,-a>)/norm,
/// on a cutoff x cutoff space. Norms are analytic, so truncation lowers the trace.
FockOperator two_mode_cat(Complex alpha, int cutoff, bool entangled);

/// Tensor product of single-mode states.
FockOperator product_state(std::span<const StateSpec> modes);

}  // namespace cvshadow
