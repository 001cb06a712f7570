#include "mlc/transforms.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mlc/detail/rand.hpp"
#include "mlc/oracles.hpp"
#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"

namespace mlc {

namespace {

void require_resource(const PureState& state, CoherenceLevel level,
                      const char* which) {
  if (coherence_rank(state) <= level.k)
    throw NotResourceStateError(std::string(which) + " is free at level " +
                                    std::to_string(level.k) +
                                    "; conversion needs resource states",
                                which);
}

void check_pair(const PureState& source, const PureState& target,
                CoherenceLevel level) {
  if (source.dim() != target.dim())
    throw InvalidStateError("source and target dimensions differ");
  if (level.k < 2 || level.k >= source.dim())
    throw LevelOutOfRangeError("conversion needs 2 <= k < dim, got k = " +
                               std::to_string(level.k));
  require_resource(source, level, "source");
  require_resource(target, level, "target");
}

/// Unclamped conversion ratio g / (r (1 - g)).
double conversion_ratio(double g, double r) { return g / (r * (1.0 - g)); }

/// Checks that pushing the source projector through the map reproduces
/// (scale x) the target projector.
void check_conversion(const KCoherencePreservingMap& map) {
  DensityOperator out = apply(map.base, outer_product(map.source));
  Matrix expected = map.base.scale() *
                    (map.target.coeffs() * map.target.coeffs().adjoint());
  double err = (out.matrix() - expected).cwiseAbs().maxCoeff();
  if (err > 1e-10)
    throw Error("constructed map failed to reproduce the target, error " +
                std::to_string(err));
}

}  // namespace

double max_conversion_probability(const PureState& source,
                                  const PureState& target,
                                  CoherenceLevel level) {
  check_pair(source, target, level);
  const double g = geometric_k(source, CoherenceLevel(level.k + 1)).value;
  const double r = robustness_k(target, level).value;
  const double ratio = conversion_ratio(g, r);
  // Snap to 1 within roundoff so boundary cases (self-conversion of the
  // maximally coherent state) report exact determinism.
  if (ratio >= 1.0 - 1e-12) return 1.0;
  return ratio;
}

ConversionReport deterministic_feasible(const PureState& source,
                                        const PureState& target,
                                        CoherenceLevel level,
                                        const OracleBudget& budget) {
  check_pair(source, target, level);
  const double g = geometric_k(source, CoherenceLevel(level.k + 1)).value;
  const double r = robustness_k(target, level).value;
  const double ratio = conversion_ratio(g, r);
  const bool feasible = ratio >= 1.0 - 1e-12;
  const double p_max = feasible ? 1.0 : ratio;

  ConversionReport report{source,  target, level,    g,
                          r,       ratio,  p_max,    feasible,
                          std::nullopt};
  if (feasible) {
    KCoherencePreservingMap map =
        build_k_preserving(source, target, level, 1.0, budget);
    check_conversion(map);
    report.map = std::move(map);
  }
  return report;
}

std::pair<PureState, KCoherencePreservingMap> nonisolation_witness(
    const PureState& target, CoherenceLevel level, const OracleBudget& budget,
    std::uint64_t rng_seed) {
  const int d = target.dim();
  const int k = level.k;
  if (k < 2 || k >= d)
    throw LevelOutOfRangeError("witness search needs 2 <= k < dim, got k=" +
                               std::to_string(k) + ", dim=" +
                               std::to_string(d));
  require_resource(target, level, "target");

  const double r = robustness_k(target, level).value;
  const double threshold = 1.0 - 1.0 / (r + 1.0);
  const PureState mc = maximally_coherent(d);
  const Matrix target_proj = target.coeffs() * target.coeffs().adjoint();
  const Matrix mc_proj = mc.coeffs() * mc.coeffs().adjoint();

  detail::Rand rand(rng_seed);
  auto admissible = [&](const PureState& cand, double slack) {
    if (coherence_rank(cand) <= k) return false;
    if (geometric_k(cand, CoherenceLevel(k + 1)).value < threshold + slack)
      return false;
    Matrix proj = cand.coeffs() * cand.coeffs().adjoint();
    return (proj - target_proj).norm() > 1e-6 && (proj - mc_proj).norm() > 1e-6;
  };

  std::optional<PureState> witness;
  double eps = 0.3;
  for (int round = 0; round < 12 && !witness; ++round, eps /= 2.0) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v = mc.coeffs();
      for (int i = 0; i < d; ++i) v[i] += eps * rand.cnormal();
      double n = v.norm();
      if (n < 1e-9) continue;
      v /= n;
      PureState cand(d, std::move(v));
      if (admissible(cand, 1e-9)) {
        witness = std::move(cand);
        break;
      }
    }
  }
  if (!witness) {
    // Dephased fallback: random phases keep every magnitude of the maximally
    // coherent state, hence its geometric measure, while moving the
    // projector; needed when the threshold is met only with equality.
    for (int attempt = 0; attempt < 64 && !witness; ++attempt) {
      Vector v(d);
      for (int i = 0; i < d; ++i) {
        double a = 2.0 * M_PI * rand.uniform();
        v[i] = mc.coeffs()[i] * Complex(std::cos(a), std::sin(a));
      }
      PureState cand(d, std::move(v));
      if (coherence_rank(cand) > k &&
          geometric_k(cand, CoherenceLevel(k + 1)).value >= threshold - 1e-12 &&
          (cand.coeffs() * cand.coeffs().adjoint() - target_proj).norm() > 1e-6)
        witness = std::move(cand);
    }
  }
  if (!witness)
    throw Error("witness search exhausted its attempts");

  KCoherencePreservingMap map =
      build_k_preserving(*witness, target, level, 1.0, budget);
  check_conversion(map);
  return {std::move(*witness), std::move(map)};
}

bool corollary_check(int dim, CoherenceLevel level, int trials,
                     std::uint64_t rng_seed, const OracleBudget& budget,
                     std::string* diagnostic) {
  const int k = level.k;
  if (k < 2 || k >= dim)
    throw LevelOutOfRangeError("corollary check needs 2 <= k < dim, got k=" +
                               std::to_string(k) + ", dim=" +
                               std::to_string(dim));
  if (trials < 1)
    throw InvalidConstraintError("corollary check needs at least one trial");

  const PureState mc = maximally_coherent(dim);
  std::vector<std::string> failures(trials);
  std::vector<char> ok(trials, 0);
  parallel_for(trials, [&](std::size_t i) {
    PureState target =
        sample_pure(dim, derive_seed(rng_seed, i), k + 1);
    try {
      ConversionReport rep = deterministic_feasible(mc, target, level, budget);
      if (rep.deterministic_feasible && rep.map) {
        ok[i] = 1;
      } else {
        failures[i] = "not feasible for target " + state_to_json(target);
      }
    } catch (const std::exception& e) {
      failures[i] = std::string(e.what()) + " for target " +
                    state_to_json(target);
    }
  });
  for (int i = 0; i < trials; ++i) {
    if (!ok[i]) {
      if (diagnostic) *diagnostic = failures[i];
      return false;
    }
  }
  return true;
}

std::string report_to_json(const ConversionReport& report) {
  nlohmann::json j;
  j["dim"] = report.source.dim();
  j["level"] = report.level.k;
  j["source"] = nlohmann::json::parse(state_to_json(report.source));
  j["target"] = nlohmann::json::parse(state_to_json(report.target));
  j["g_source"] = report.g_source;
  j["r_target"] = report.r_target;
  j["ratio"] = report.ratio;
  j["p_max"] = report.p_max;
  j["feasible"] = report.deterministic_feasible;
  if (report.map) j["map"] = nlohmann::json::parse(map_to_json(*report.map));
  return j.dump();
}

}  // namespace mlc
