#pragma once

#include "mlc/oracles.hpp"
#include "mlc/statespace.hpp"

namespace mlc {

/// Closed-form robustness value plus the split index the formula selected.
struct RobustnessResult {
  double value;     // >= 0; zero iff coherence rank <= k
  int l_star;       // selected split index, in {1,...,k}
  double tail_sum;  // sum of the d - l_star + 1 smallest magnitudes
};

struct GeometricResult {
  double value;  // in [0, 1)
};

RobustnessResult robustness_k(const PureState& state, CoherenceLevel level);
GeometricResult geometric_k(const PureState& state, CoherenceLevel level);

/// Numerical value with a convergence flag; the value is always a certified
/// upper bound, converged or not.
struct OracleValue {
  double value;
  bool converged;
};

/// Minimizes the mixing weight of a free state that pulls the input into the
/// level-k free set, certifying the result by explicit decomposition.
/// Independent of the closed form above.
OracleValue robustness_k_oracle(const DensityOperator& state,
                                CoherenceLevel level,
                                const OracleBudget& budget);

/// Maximal squared overlap with rank-(k-1) states, by enumerating all
/// (k-1)-subsets of basis indices; the optimum on each subset is the
/// renormalized restriction. Exact up to floating point.
double geometric_k_oracle(const PureState& state, CoherenceLevel level,
                          const OracleBudget& budget);

}  // namespace mlc
