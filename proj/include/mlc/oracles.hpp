#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlc/statespace.hpp"

namespace mlc {

/// Effort knobs shared by the numerical oracles. Every oracle is
/// deterministic given (inputs, seed, budget).
struct OracleBudget {
  int max_iterations = 2000;
  int restarts = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-7;
};

struct IkComponent {
  double weight;
  PureState pure;
};

/// Explicit convex decomposition into pure states of coherence rank <= k,
/// proving membership of an operator in the level-k free set.
struct IkCertificate {
  CoherenceLevel level;
  std::vector<IkComponent> components;
  double residual;

  /// Sum of weight * |pure><pure| over the components.
  Matrix mixture(int dim) const;
};

/// Tries to produce a decomposition certificate with residual within
/// budget.tolerance. Failure is inconclusive: it does not prove the operator
/// lies outside the free set.
std::optional<IkCertificate> certify_in_Ik(const DensityOperator& op,
                                           CoherenceLevel level,
                                           const OracleBudget& budget);

/// Best decomposition found regardless of whether it meets the tolerance.
IkCertificate project_in_Ik(const DensityOperator& op, CoherenceLevel level,
                            const OracleBudget& budget);

/// Optimal free state for the robustness minimization, with certificates for
/// the free state itself and for the pulled-back mixture.
struct OptimalDelta {
  DensityOperator delta;
  double s_value;
  IkCertificate delta_certificate;
  IkCertificate mix_certificate;  // certifies (target + s*delta)/(1+s)
  bool converged;                 // matched the closed form within 1e-3
};

OptimalDelta optimal_delta(const PureState& target, CoherenceLevel level,
                           const OracleBudget& budget);

/// Haar-like random pure state. With min_rank set, resamples until the
/// coherence rank reaches the constraint.
PureState sample_pure(int dim, std::uint64_t rng_seed,
                      std::optional<int> min_rank = std::nullopt);

/// Random element of the level-k free set: a Dirichlet-weighted mixture of
/// rank-<=k pure states with component count uniform in {1,...,d^2}.
DensityOperator sample_in_Ik(int dim, CoherenceLevel level,
                             std::uint64_t rng_seed);

/// Certificate JSON:
/// {"level": k, "components": [{"weight": w, "coeffs": [[re,im],...]}],
///  "residual": r}
std::string certificate_to_json(const IkCertificate& cert);
IkCertificate certificate_from_json(const std::string& text);

}  // namespace mlc
