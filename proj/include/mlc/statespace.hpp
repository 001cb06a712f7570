#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlc/errors.hpp"

namespace mlc {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;

/// Magnitudes below this count as zero when reading off the coherence rank
/// of a coefficient vector.
inline constexpr double kDefaultZeroTol = 1e-12;

/// Coherence level k. Indexes the free-state hierarchy: level k admits
/// mixtures of pure states with at most k nonzero coefficients.
struct CoherenceLevel {
  int k;

  explicit CoherenceLevel(int level);
};

/// Unit-norm coefficient vector in the fixed reference basis.
class PureState {
 public:
  PureState(int dim, Vector coeffs);

  int dim() const { return dim_; }
  const Vector& coeffs() const { return coeffs_; }

 private:
  int dim_;
  Vector coeffs_;
};

/// Hermitian positive semidefinite matrix with 0 < trace <= 1. Sub-normalized
/// operators are allowed; they arise as unnormalized branch outputs of
/// trace non-increasing maps.
class DensityOperator {
 public:
  DensityOperator(int dim, Matrix mat);

  int dim() const { return dim_; }
  const Matrix& matrix() const { return mat_; }
  double trace() const { return mat_.trace().real(); }

 private:
  int dim_;
  Matrix mat_;
};

/// Number of coefficients with magnitude above zero_tol.
int coherence_rank(const PureState& state, double zero_tol = kDefaultZeroTol);

/// True when the pure state is free at the given level, i.e. its coherence
/// rank is at most k.
bool pure_in_Ik(const PureState& state, CoherenceLevel level,
                double zero_tol = kDefaultZeroTol);

/// Coefficient magnitudes sorted in non-increasing order.
std::vector<double> sorted_coeff_magnitudes(const PureState& state);

/// Rank-one projector |psi><psi|.
DensityOperator outer_product(const PureState& state);

/// The maximally coherent state: all coefficients 1/sqrt(d).
PureState maximally_coherent(int dim);

/// State JSON format: {"dim": d, "coeffs": [[re, im], ...]}.
PureState parse_state_json(const std::string& text);
std::string state_to_json(const PureState& state);

/// Reads and parses a state file. Throws IoError on filesystem failure and
/// ParseError on malformed content.
PureState load_state(const std::string& path);
void save_state(const PureState& state, const std::string& path);

}  // namespace mlc
