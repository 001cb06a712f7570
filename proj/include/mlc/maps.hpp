#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlc/measures.hpp"
#include "mlc/oracles.hpp"
#include "mlc/statespace.hpp"

namespace mlc {

/// Affine two-outcome map  sigma -> p Tr(A sigma) rho1 + Tr((I-A) sigma) rho2
/// with effect 0 <= A <= I and scale p in (0, 1]. Trace preserving exactly
/// when p = 1; trace non-increasing otherwise.
class TwoOutcomeMap {
 public:
  TwoOutcomeMap(Matrix effect, DensityOperator out1, DensityOperator out2,
                double scale);

  const Matrix& effect() const { return effect_; }
  const DensityOperator& out1() const { return out1_; }
  const DensityOperator& out2() const { return out2_; }
  double scale() const { return scale_; }
  int dim() const { return out1_.dim(); }

 private:
  Matrix effect_;
  DensityOperator out1_, out2_;
  double scale_;
};

TwoOutcomeMap build_two_outcome(const Matrix& effect,
                                const DensityOperator& out1,
                                const DensityOperator& out2, double p);

DensityOperator apply(const TwoOutcomeMap& map, const DensityOperator& input);

/// Two-outcome map with effect |source><source|, first outcome
/// |target><target| and second outcome the optimal free state of the target's
/// robustness minimization. Preserves the level-k free set whenever the scale
/// respects the conversion bound.
struct KCoherencePreservingMap {
  TwoOutcomeMap base;
  CoherenceLevel level;
  OptimalDelta delta_cert;
  PureState source, target;
};

KCoherencePreservingMap build_k_preserving(const PureState& source,
                                           const PureState& target,
                                           CoherenceLevel level, double p,
                                           const OracleBudget& budget);

struct VerificationTrial {
  std::uint64_t sigma_seed;  // reproduces the sampled input via sample_in_Ik
  double overlap;            // Tr(|source><source| sigma)
  double trace_error;        // |Tr out - (Tr in - (1-p) overlap)|
  double residual;           // certification residual of the renormalized output
  bool scalar_ok;            // (1/p)(1/overlap - 1) >= closed-form robustness
  bool trace_ok;
  bool cert_ok;
};

struct VerificationReport {
  int trials = 0;
  int scalar_passes = 0;
  int trace_passes = 0;
  int cert_passes = 0;
  std::vector<VerificationTrial> records;

  bool all_ok() const {
    return scalar_passes == trials && trace_passes == trials &&
           cert_passes == trials;
  }
};

/// Samples `trials` random free inputs, pushes them through the map and
/// certifies that each renormalized output stays free, alongside the scalar
/// condition and the trace contract.
VerificationReport verify_preserves_Ik(const KCoherencePreservingMap& map,
                                       int trials, const OracleBudget& budget,
                                       std::uint64_t rng_seed);

/// Map JSON: effect/out1/out2 as row-major [re, im] entries plus dim, scale
/// and level.
std::string map_to_json(const KCoherencePreservingMap& map);

/// Rebuilds the affine action (effect, outcomes, scale) from map JSON; enough
/// to apply a serialized map.
TwoOutcomeMap two_outcome_from_json(const std::string& text);

}  // namespace mlc
