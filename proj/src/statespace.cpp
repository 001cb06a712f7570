#include "mlc/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mlc {

CoherenceLevel::CoherenceLevel(int level) : k(level) {
  if (level < 1)
    throw LevelOutOfRangeError("coherence level must be at least 1, got " +
                               std::to_string(level));
}

PureState::PureState(int dim, Vector coeffs) : dim_(dim), coeffs_(std::move(coeffs)) {
  if (dim < 2)
    throw InvalidStateError("state dimension must be at least 2, got " +
                            std::to_string(dim));
  if (coeffs_.size() != dim)
    throw InvalidStateError("coefficient count " + std::to_string(coeffs_.size()) +
                            " does not match dimension " + std::to_string(dim));
  double norm = coeffs_.norm();
  if (std::abs(norm - 1.0) > kNormTol)
    throw InvalidStateError("coefficient vector is not normalized: |norm - 1| = " +
                            std::to_string(std::abs(norm - 1.0)));
}

DensityOperator::DensityOperator(int dim, Matrix mat) : dim_(dim), mat_(std::move(mat)) {
  if (dim < 2)
    throw InvalidStateError("operator dimension must be at least 2, got " +
                            std::to_string(dim));
  if (mat_.rows() != dim || mat_.cols() != dim)
    throw InvalidStateError("matrix shape does not match dimension " +
                            std::to_string(dim));
  double herm_err = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > kHermitianTol)
    throw InvalidStateError("matrix is not Hermitian: max asymmetry " +
                            std::to_string(herm_err));
  mat_ = (mat_ + mat_.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(mat_, Eigen::EigenvaluesOnly);
  double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol)
    throw InvalidStateError("matrix is not positive semidefinite: min eigenvalue " +
                            std::to_string(min_eig));
  double tr = mat_.trace().real();
  if (tr <= 0.0 || tr > 1.0 + kTraceTol)
    throw InvalidStateError("trace must lie in (0, 1], got " + std::to_string(tr));
}

int coherence_rank(const PureState& state, double zero_tol) {
  if (zero_tol < 0.0)
    throw InvalidStateError("zero tolerance must be non-negative");
  int rank = 0;
  for (int i = 0; i < state.dim(); ++i)
    if (std::abs(state.coeffs()[i]) > zero_tol) ++rank;
  return rank;
}

bool pure_in_Ik(const PureState& state, CoherenceLevel level, double zero_tol) {
  return coherence_rank(state, zero_tol) <= level.k;
}

std::vector<double> sorted_coeff_magnitudes(const PureState& state) {
  std::vector<double> mags(state.dim());
  for (int i = 0; i < state.dim(); ++i) mags[i] = std::abs(state.coeffs()[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  return mags;
}

DensityOperator outer_product(const PureState& state) {
  Matrix m = state.coeffs() * state.coeffs().adjoint();
  return DensityOperator(state.dim(), std::move(m));
}

PureState maximally_coherent(int dim) {
  Vector c = Vector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)), 0.0));
  return PureState(dim, std::move(c));
}

PureState parse_state_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("coeffs"))
    throw ParseError("state JSON must be an object with 'dim' and 'coeffs'");
  if (!j["dim"].is_number_integer())
    throw ParseError("'dim' must be an integer");
  int dim = j["dim"].get<int>();
  if (!j["coeffs"].is_array())
    throw ParseError("'coeffs' must be an array of [re, im] pairs");
  Vector c(j["coeffs"].size());
  int idx = 0;
  for (const auto& entry : j["coeffs"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
        !entry[1].is_number())
      throw ParseError("each coefficient must be a [re, im] pair of numbers");
    c[idx++] = Complex(entry[0].get<double>(), entry[1].get<double>());
  }
  return PureState(dim, std::move(c));
}

std::string state_to_json(const PureState& state) {
  nlohmann::json j;
  j["dim"] = state.dim();
  auto coeffs = nlohmann::json::array();
  for (int i = 0; i < state.dim(); ++i)
    coeffs.push_back({state.coeffs()[i].real(), state.coeffs()[i].imag()});
  j["coeffs"] = std::move(coeffs);
  return j.dump();
}

PureState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open state file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading state file: " + path);
  return parse_state_json(buf.str());
}

void save_state(const PureState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << state_to_json(state) << "\n";
  if (!out) throw IoError("failed writing state file: " + path);
}

}  // namespace mlc
