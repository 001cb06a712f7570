#include "mlc/maps.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"

namespace mlc {

TwoOutcomeMap::TwoOutcomeMap(Matrix effect, DensityOperator out1,
                             DensityOperator out2, double scale)
    : effect_(std::move(effect)),
      out1_(std::move(out1)),
      out2_(std::move(out2)),
      scale_(scale) {
  const int d = out1_.dim();
  if (out2_.dim() != d || effect_.rows() != d || effect_.cols() != d)
    throw InvalidStateError("map pieces disagree on dimension");
  if (std::abs(out1_.trace() - 1.0) > 1e-10 ||
      std::abs(out2_.trace() - 1.0) > 1e-10)
    throw InvalidStateError("map outcomes must have unit trace");
  double herm_err = (effect_ - effect_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > kHermitianTol)
    throw InvalidEffectError("effect is not Hermitian: max asymmetry " +
                             std::to_string(herm_err));
  effect_ = (effect_ + effect_.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(effect_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-10 || hi > 1.0 + 1e-10)
    throw InvalidEffectError("effect eigenvalues must lie in [0, 1], got [" +
                             std::to_string(lo) + ", " + std::to_string(hi) +
                             "]");
  if (!(scale_ > 0.0) || scale_ > 1.0)
    throw InvalidScaleError("map scale must lie in (0, 1], got " +
                            std::to_string(scale_));
}

TwoOutcomeMap build_two_outcome(const Matrix& effect,
                                const DensityOperator& out1,
                                const DensityOperator& out2, double p) {
  return TwoOutcomeMap(effect, out1, out2, p);
}

DensityOperator apply(const TwoOutcomeMap& map, const DensityOperator& input) {
  if (input.dim() != map.dim())
    throw InvalidStateError("input dimension does not match the map");
  const double tr = input.trace();
  double t1 = (map.effect() * input.matrix()).trace().real();
  t1 = std::clamp(t1, 0.0, tr);
  // Second branch weight written as tr - t1 so the trace contract
  // Tr out = Tr in - (1 - p) t1 holds identically.
  const double t2 = tr - t1;
  Matrix out = (map.scale() * t1) * map.out1().matrix() +
               t2 * map.out2().matrix();
  return DensityOperator(map.dim(), std::move(out));
}

KCoherencePreservingMap build_k_preserving(const PureState& source,
                                           const PureState& target,
                                           CoherenceLevel level, double p,
                                           const OracleBudget& budget) {
  const int d = source.dim();
  const int k = level.k;
  if (target.dim() != d)
    throw InvalidStateError("source and target dimensions differ");
  if (k < 2 || k >= d)
    throw LevelOutOfRangeError("conversion maps need 2 <= k < dim, got k=" +
                               std::to_string(k) + ", dim=" +
                               std::to_string(d));
  if (coherence_rank(source) <= k)
    throw NotResourceStateError("source is free at level " + std::to_string(k),
                                "source");
  if (coherence_rank(target) <= k)
    throw NotResourceStateError("target is free at level " + std::to_string(k),
                                "target");
  if (!(p > 0.0) || p > 1.0)
    throw InvalidScaleError("scale p must lie in (0, 1], got " +
                            std::to_string(p));

  const double g = geometric_k(source, CoherenceLevel(k + 1)).value;
  const double r = robustness_k(target, level).value;
  const double bound = g / (r * (1.0 - g));
  if (p > bound + 1e-12) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "requested scale p=%.12g exceeds the conversion bound %.12g",
                  p, bound);
    throw BoundViolationError(msg, bound);
  }

  OptimalDelta od = optimal_delta(target, level, budget);
  if (!od.converged)
    throw Error("free-state search did not converge; rerun with a larger budget");

  TwoOutcomeMap base(source.coeffs() * source.coeffs().adjoint(),
                     outer_product(target), od.delta, p);
  return {std::move(base), level, std::move(od), source, target};
}

VerificationReport verify_preserves_Ik(const KCoherencePreservingMap& map,
                                       int trials, const OracleBudget& budget,
                                       std::uint64_t rng_seed) {
  const int d = map.base.dim();
  const double p = map.base.scale();
  const double r_target = robustness_k(map.target, map.level).value;

  VerificationReport report;
  report.trials = std::max(0, trials);
  report.records.resize(report.trials);
  parallel_for(report.trials, [&](std::size_t i) {
    VerificationTrial t{};
    t.sigma_seed = derive_seed(rng_seed, i);
    DensityOperator sigma = sample_in_Ik(d, map.level, t.sigma_seed);
    const double tr = sigma.trace();
    double t1 = (map.base.effect() * sigma.matrix()).trace().real();
    t1 = std::clamp(t1, 0.0, tr);
    t.overlap = t1;

    DensityOperator out = apply(map.base, sigma);
    t.trace_error = std::abs(out.trace() - (tr - (1.0 - p) * t1));
    t.trace_ok = t.trace_error <= 1e-10;

    // Scalar condition, with a small slack against roundoff at the extreme
    // points of the free set.
    if (t1 <= 0.0) {
      t.scalar_ok = true;
    } else {
      const double lhs = (1.0 / p) * (1.0 / t1 - 1.0);
      t.scalar_ok = lhs >= r_target - 1e-9;
    }

    DensityOperator renorm(d, out.matrix() / out.trace());
    auto cert = certify_in_Ik(renorm, map.level, budget);
    t.cert_ok = cert.has_value();
    t.residual = cert ? cert->residual
                      : project_in_Ik(renorm, map.level, budget).residual;
    report.records[i] = std::move(t);
  });
  for (const auto& t : report.records) {
    report.scalar_passes += t.scalar_ok;
    report.trace_passes += t.trace_ok;
    report.cert_passes += t.cert_ok;
  }
  return report;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  auto arr = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      arr.push_back({m(i, j).real(), m(i, j).imag()});
  return arr;
}

Matrix matrix_from_json(const nlohmann::json& arr, int d, const char* what) {
  if (!arr.is_array() || arr.size() != std::size_t(d) * d)
    throw ParseError(std::string(what) + " must hold dim*dim [re, im] pairs");
  Matrix m(d, d);
  int idx = 0;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number())
      throw ParseError(std::string(what) + " entries must be [re, im] pairs");
    m(idx / d, idx % d) = Complex(e[0].get<double>(), e[1].get<double>());
    ++idx;
  }
  return m;
}

}  // namespace

std::string map_to_json(const KCoherencePreservingMap& map) {
  nlohmann::json j;
  j["dim"] = map.base.dim();
  j["level"] = map.level.k;
  j["scale"] = map.base.scale();
  j["effect"] = matrix_to_json(map.base.effect());
  j["out1"] = matrix_to_json(map.base.out1().matrix());
  j["out2"] = matrix_to_json(map.base.out2().matrix());
  return j.dump();
}

TwoOutcomeMap two_outcome_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("scale") ||
      !j.contains("effect") || !j.contains("out1") || !j.contains("out2"))
    throw ParseError("map JSON needs 'dim', 'scale', 'effect', 'out1', 'out2'");
  if (!j["dim"].is_number_integer() || !j["scale"].is_number())
    throw ParseError("'dim' must be integer and 'scale' numeric");
  const int d = j["dim"].get<int>();
  if (d < 2) throw ParseError("'dim' must be at least 2");
  Matrix effect = matrix_from_json(j["effect"], d, "'effect'");
  DensityOperator out1(d, matrix_from_json(j["out1"], d, "'out1'"));
  DensityOperator out2(d, matrix_from_json(j["out2"], d, "'out2'"));
  return build_two_outcome(effect, out1, out2, j["scale"].get<double>());
}

}  // namespace mlc
