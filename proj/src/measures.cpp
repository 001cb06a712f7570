#include "mlc/measures.hpp"

#include <algorithm>
#include <cmath>

#include "mlc/detail/conic.hpp"

namespace mlc {

namespace {

void check_level(int k, int d, const char* what) {
  if (k < 2 || k > d)
    throw LevelOutOfRangeError(std::string(what) +
                               " needs 2 <= k <= dim, got k=" +
                               std::to_string(k) + ", dim=" +
                               std::to_string(d));
}

}  // namespace

RobustnessResult robustness_k(const PureState& state, CoherenceLevel level) {
  const int k = level.k;
  const int d = state.dim();
  check_level(k, d, "robustness");
  const auto nu = sorted_coeff_magnitudes(state);
  std::vector<double> tail(d + 1, 0.0);
  for (int i = d - 1; i >= 0; --i) tail[i] = tail[i + 1] + nu[i];

  // Largest l in {2,...,k} whose leading magnitude dominates the averaged
  // tail; equality counts. Falls back to l = 1.
  int l_star = 1;
  for (int l = k; l >= 2; --l) {
    if (nu[l - 2] >= tail[l - 1] / (k - l + 1)) {
      l_star = l;
      break;
    }
  }
  const double s = tail[l_star - 1];
  double sumsq = 0.0;
  for (int i = l_star - 1; i < d; ++i) sumsq += nu[i] * nu[i];
  double value = s * s / (k - l_star + 1) - sumsq;
  if (coherence_rank(state) <= k) value = 0.0;
  return {std::max(value, 0.0), l_star, s};
}

GeometricResult geometric_k(const PureState& state, CoherenceLevel level) {
  const int k = level.k;
  const int d = state.dim();
  check_level(k, d, "geometric measure");
  const auto nu = sorted_coeff_magnitudes(state);
  // Tail form of "one minus the k-1 largest squared magnitudes"; summing the
  // small terms directly avoids cancellation when the value is near zero.
  double value = 0.0;
  for (int i = d - 1; i >= k - 1; --i) value += nu[i] * nu[i];
  return {value};
}

OracleValue robustness_k_oracle(const DensityOperator& state,
                                CoherenceLevel level,
                                const OracleBudget& budget) {
  const int d = state.dim();
  const int k = level.k;
  check_level(k, d, "robustness oracle");
  if (std::abs(state.trace() - 1.0) > 1e-10)
    throw InvalidStateError("robustness oracle expects a normalized state, trace = " +
                            std::to_string(state.trace()));

  // States that already certify as free have zero robustness; a cheap
  // single-restart pass settles that before the full minimization.
  OracleBudget pre = budget;
  pre.restarts = 1;
  pre.max_iterations = std::min(budget.max_iterations, 800);
  if (certify_in_Ik(state, level, pre)) return {0.0, true};

  auto rs = detail::robustness_search(state.matrix(), k, budget.max_iterations,
                                      budget.restarts, budget.tolerance,
                                      budget.seed);
  const bool converged = rs.feasible && rs.gap <= 1e-6;
  return {rs.s_certified, converged};
}

double geometric_k_oracle(const PureState& state, CoherenceLevel level,
                          const OracleBudget& budget) {
  (void)budget;  // enumeration is exhaustive; no iterative search involved
  const int k = level.k;
  const int d = state.dim();
  check_level(k, d, "geometric oracle");
  const auto subsets = detail::k_subsets(d, k - 1);
  double best = 0.0;
  for (const auto& S : subsets) {
    double nrm2 = 0.0;
    for (int i : S) nrm2 += std::norm(state.coeffs()[i]);
    if (nrm2 <= 0.0) continue;
    const double nrm = std::sqrt(nrm2);
    // Candidate: the renormalized restriction of the state to S.
    Complex inner = 0.0;
    for (int i : S)
      inner += std::conj(state.coeffs()[i] / nrm) * state.coeffs()[i];
    best = std::max(best, std::norm(inner));
  }
  return 1.0 - best;
}

}  // namespace mlc
