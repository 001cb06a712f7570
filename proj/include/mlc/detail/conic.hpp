#pragma once

#include <cstdint>
#include <vector>

#include "mlc/statespace.hpp"

namespace mlc::detail {

/// All k-element subsets of {0,...,d-1} in lexicographic order.
std::vector<std::vector<int>> k_subsets(int d, int k);

/// PSD part of a Hermitian matrix (negative eigenvalues clipped to zero).
Matrix psd_part(const Matrix& m);

/// Projects onto the cone of operators expressible as a sum of PSD blocks,
/// one block per k-subset of the basis indices. Runs consensus ADMM over the
/// blocks; the internal state persists across calls, so repeated projections
/// of nearby inputs warm-start.
class ConeProjector {
 public:
  ConeProjector(int dim, int k);

  void reset();
  void randomize(std::uint64_t seed, double scale);

  /// Runs up to max_iters sweeps, stopping early when the distance between
  /// the input and the block sum stabilizes below stop_tol. Returns that
  /// distance (Frobenius); the block sum is always a valid cone member.
  double project(const Matrix& input, int max_iters, double stop_tol);

  const Matrix& total() const { return total_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  const std::vector<std::vector<int>>& subsets() const { return subsets_; }
  int dim() const { return dim_; }
  int block_size() const { return k_; }

 private:
  int dim_, k_;
  double rho_;
  std::vector<std::vector<int>> subsets_;
  std::vector<Matrix> blocks_;  // one k x k PSD block per subset
  Matrix zbar_, dual_;          // consensus state, d x d
  Matrix total_;                // sum of embedded blocks
};

/// Splits an operator into PSD blocks, one per k-subset, so the embedded
/// blocks sum to the input. Unlike ConeProjector this does not compute the
/// Euclidean projection onto the cone: it runs Douglas-Rachford splitting
/// between the product of PSD cones and the affine matching constraint,
/// whose projection is entrywise division by the subset coverage counts.
/// For cone members the split keeps converging where the consensus scheme
/// stalls under heavy subset overlap; for non-members the residual plateaus
/// near the cone distance, so a failed split still reports how far off the
/// best decomposition is.
class ConeDecomposer {
 public:
  ConeDecomposer(int dim, int k);

  void reset();
  void randomize(std::uint64_t seed, double scale);

  /// Runs up to max_iters splitting steps, stopping once the blocks sum to
  /// the target within stop_tol (Frobenius). Returns the best distance seen;
  /// blocks() then holds the PSD blocks achieving it.
  double decompose(const Matrix& target, int max_iters, double stop_tol);

  const std::vector<Matrix>& blocks() const { return blocks_; }
  const std::vector<std::vector<int>>& subsets() const { return subsets_; }

 private:
  int dim_, k_;
  bool cold_ = true;
  std::vector<std::vector<int>> subsets_;
  Eigen::MatrixXd coverage_;    // how many subsets cover each matrix entry
  std::vector<Matrix> drive_;   // unconstrained splitting state, k x k each
  std::vector<Matrix> blocks_;  // PSD iterates, one per subset
};

/// Everything the robustness search learns about one input, in a form the
/// caller can turn into decomposition certificates.
struct RobustnessSearch {
  bool feasible = false;
  double s_certified = 0.0;  // trace of the certified perturbation
  double s_raw = 0.0;        // trace before the interior lift
  double lift = 0.0;         // mass added along the maximally mixed direction
  double gap = 0.0;          // splitting residual at termination
  double mix_residual = 0.0; // certification residual at trace-1 scale
  std::vector<Matrix> delta_blocks;
  std::vector<Matrix> mix_blocks;
  std::vector<std::vector<int>> subsets;
  int iterations = 0;
};

/// Douglas-Rachford minimization of Tr(Delta) subject to Delta and
/// rho + Delta both lying in the level-k cone, followed by certification of
/// the perturbed state with a geometric interior lift. The result's blocks
/// sum to the reported operators exactly, so feasibility of s_certified is
/// checkable without trusting the solver.
RobustnessSearch robustness_single(const Matrix& rho, int k, int max_iters,
                                   double tol, std::uint64_t seed,
                                   bool randomize);

/// Restart driver. The first run starts cold, the rest from seeded random
/// states. Runs in chunks of four through parallel_for, stopping once the two
/// best certified values agree within 1e-5. Picks the smallest certified
/// value, ties resolved toward the lowest restart index, so the outcome does
/// not depend on thread scheduling.
RobustnessSearch robustness_search(const Matrix& rho, int k, int max_iters,
                                   int restarts, double tol,
                                   std::uint64_t seed);

}  // namespace mlc::detail
