#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "mlc/maps.hpp"
#include "mlc/measures.hpp"
#include "mlc/statespace.hpp"

namespace mlc {

/// Conversion feasibility data for a source/target pair at one level.
/// `ratio` keeps the unclamped bound for diagnostics; `p_max` clamps it to
/// (0, 1]. `feasible` means certified by this construction; false is not a
/// proof of impossibility.
struct ConversionReport {
  PureState source, target;
  CoherenceLevel level;
  double g_source;  // geometric measure of the source at level k+1
  double r_target;  // robustness of the target at level k
  double ratio;
  double p_max;
  bool deterministic_feasible;
  std::optional<KCoherencePreservingMap> map;
};

/// min(1, g / (r (1 - g))); strictly positive for resource pairs.
double max_conversion_probability(const PureState& source,
                                  const PureState& target,
                                  CoherenceLevel level);

/// Full report; attaches the unit-scale map when the conversion is feasible
/// and checks that it reproduces the target.
ConversionReport deterministic_feasible(const PureState& source,
                                        const PureState& target,
                                        CoherenceLevel level,
                                        const OracleBudget& budget = {});

/// A source state distinct from the target that still converts onto it
/// deterministically, witnessing that no resource state is isolated. Starts
/// from the maximally coherent state and perturbs while the geometric measure
/// stays above the threshold 1 - 1/(R + 1).
std::pair<PureState, KCoherencePreservingMap> nonisolation_witness(
    const PureState& target, CoherenceLevel level, const OracleBudget& budget,
    std::uint64_t rng_seed);

/// Checks that the maximally coherent state converts deterministically and
/// exactly onto `trials` random resource targets. On failure, writes a
/// description of the first failing target into *diagnostic if given.
bool corollary_check(int dim, CoherenceLevel level, int trials,
                     std::uint64_t rng_seed, const OracleBudget& budget = {},
                     std::string* diagnostic = nullptr);

std::string report_to_json(const ConversionReport& report);

}  // namespace mlc
