#include "mlc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "mlc/detail/conic.hpp"
#include "mlc/detail/rand.hpp"
#include "mlc/measures.hpp"
#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"

namespace mlc {

namespace {

Matrix embed_sum(const std::vector<Matrix>& blocks,
                 const std::vector<std::vector<int>>& subsets, int dim) {
  Matrix m = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& S = subsets[i];
    const int k = static_cast<int>(S.size());
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) m(S[a], S[c]) += blocks[i](a, c);
  }
  return m;
}

/// Turns PSD blocks into an explicit component list for `target`:
/// eigendecompose each scaled block, embed the eigenvectors, prune
/// negligible weights and rescale so the weights sum to the target's trace.
IkCertificate extract_certificate(CoherenceLevel level,
                                  const std::vector<Matrix>& blocks,
                                  const std::vector<std::vector<int>>& subsets,
                                  int dim, double block_scale,
                                  const Matrix& target) {
  std::vector<double> weights;
  std::vector<Vector> vecs;
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  double total = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& S = subsets[i];
    const int k = static_cast<int>(S.size());
    Matrix b = block_scale * blocks[i];
    if (k == 1) {
      double w = b(0, 0).real();
      if (w > 0.0) {
        Vector v = Vector::Zero(dim);
        v[S[0]] = 1.0;
        weights.push_back(w);
        vecs.push_back(std::move(v));
        total += w;
      }
      continue;
    }
    eig.compute((b + b.adjoint().eval()) / 2.0);
    for (int j = k - 1; j >= 0; --j) {
      double w = eig.eigenvalues()(j);
      if (w <= 0.0) continue;
      Vector v = Vector::Zero(dim);
      for (int a = 0; a < k; ++a) v[S[a]] = eig.eigenvectors()(a, j);
      weights.push_back(w);
      vecs.push_back(std::move(v));
      total += w;
    }
  }

  const double prune = 1e-12 * std::max(1.0, total);
  const double target_trace = target.trace().real();
  double kept = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > prune) kept += weights[i];
  const double factor = kept > 0.0 ? target_trace / kept : 0.0;

  std::vector<IkComponent> comps;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= prune) continue;
    Vector v = vecs[i] / vecs[i].norm();
    comps.push_back({weights[i] * factor, PureState(dim, std::move(v))});
  }

  Matrix mix = Matrix::Zero(dim, dim);
  for (const auto& c : comps)
    mix += c.weight * (c.pure.coeffs() * c.pure.coeffs().adjoint());
  double residual = (target - mix).norm();
  return {level, std::move(comps), residual};
}

IkCertificate project_impl(const DensityOperator& op, CoherenceLevel level,
                           const OracleBudget& budget) {
  const int d = op.dim();
  const int k = level.k;
  if (k > d)
    throw LevelOutOfRangeError("certification level " + std::to_string(k) +
                               " exceeds dimension " + std::to_string(d));
  const Matrix& X = op.matrix();
  const double tr = op.trace();

  // A numerically rank-one operator supported on at most k indices is its
  // own certificate.
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(X);
    double second = std::abs(eig.eigenvalues()(d - 2));
    if (second <= 1e-12) {
      Vector v = eig.eigenvectors().col(d - 1);
      int support = 0;
      for (int i = 0; i < d; ++i)
        if (std::abs(v[i]) > 1e-9) ++support;
      if (support <= k) {
        v /= v.norm();
        double residual = (X - tr * (v * v.adjoint())).norm();
        std::vector<IkComponent> comps;
        comps.push_back({tr, PureState(d, std::move(v))});
        return {level, std::move(comps), residual};
      }
    }
  }

  struct Outcome {
    double res = std::numeric_limits<double>::infinity();
    std::vector<Matrix> blocks;
    std::vector<std::vector<int>> subsets;
  };
  const int restarts = std::max(1, budget.restarts);
  const double stop = 0.2 * budget.tolerance;
  std::vector<Outcome> outs(restarts);
  int done = 0;
  while (done < restarts) {
    // The cold start alone settles most members, so give it a chance to
    // short-circuit before paying for a whole randomized chunk.
    const int m = done == 0 ? 1 : std::min(4, restarts - done);
    parallel_for(m, [&](std::size_t i) {
      const int idx = done + static_cast<int>(i);
      detail::ConeDecomposer dec(d, k);
      if (idx > 0) dec.randomize(derive_seed(budget.seed, idx), 0.5 * tr);
      outs[idx].res = dec.decompose(X, budget.max_iterations, stop);
      outs[idx].blocks = dec.blocks();
      outs[idx].subsets = dec.subsets();
    });
    done += m;
    bool hit = false;
    for (int i = 0; i < done; ++i) hit = hit || outs[i].res <= stop;
    if (hit) break;
  }
  int best = 0;
  for (int i = 1; i < done; ++i)
    if (outs[i].res < outs[best].res) best = i;
  return extract_certificate(level, outs[best].blocks, outs[best].subsets, d,
                             1.0, X);
}

}  // namespace

Matrix IkCertificate::mixture(int dim) const {
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& c : components)
    m += c.weight * (c.pure.coeffs() * c.pure.coeffs().adjoint());
  return m;
}

std::optional<IkCertificate> certify_in_Ik(const DensityOperator& op,
                                           CoherenceLevel level,
                                           const OracleBudget& budget) {
  IkCertificate cert = project_impl(op, level, budget);
  if (cert.residual <= budget.tolerance) return cert;
  return std::nullopt;
}

IkCertificate project_in_Ik(const DensityOperator& op, CoherenceLevel level,
                            const OracleBudget& budget) {
  return project_impl(op, level, budget);
}

OptimalDelta optimal_delta(const PureState& target, CoherenceLevel level,
                           const OracleBudget& budget) {
  const int d = target.dim();
  const int k = level.k;
  if (k < 2 || k >= d)
    throw LevelOutOfRangeError(
        "optimal free-state search needs 2 <= k < dim, got k=" +
        std::to_string(k) + ", dim=" + std::to_string(d));
  if (coherence_rank(target) <= k)
    throw NotResourceStateError(
        "target is free at level " + std::to_string(k) +
            "; the robustness minimization needs a resource state",
        "target");

  const Matrix rho = target.coeffs() * target.coeffs().adjoint();
  auto rs = detail::robustness_search(rho, k, budget.max_iterations,
                                      budget.restarts, budget.tolerance,
                                      budget.seed);
  const double s = rs.s_certified;
  const double closed = robustness_k(target, level).value;

  if (s < 1e-12) {
    // Degenerate: the target sits at the edge of the free set and the
    // perturbation vanished. Hand back the maximally mixed direction.
    Matrix dm = Matrix::Identity(d, d) / double(d);
    DensityOperator delta(d, dm);
    std::vector<IkComponent> comps;
    for (int i = 0; i < d; ++i) {
      Vector v = Vector::Zero(d);
      v[i] = 1.0;
      comps.push_back({1.0 / d, PureState(d, std::move(v))});
    }
    IkCertificate delta_cert{level, std::move(comps), 0.0};
    Matrix mixed = (rho + s * dm) / (1.0 + s);
    IkCertificate mix_cert =
        project_in_Ik(DensityOperator(d, mixed), level, budget);
    bool conv = rs.feasible && std::abs(s - closed) <= 1e-3;
    return {std::move(delta), s, std::move(delta_cert), std::move(mix_cert),
            conv};
  }

  Matrix delta_cone = embed_sum(rs.delta_blocks, rs.subsets, d);
  DensityOperator delta(d, delta_cone / s);
  IkCertificate delta_cert = extract_certificate(
      level, rs.delta_blocks, rs.subsets, d, 1.0 / s, delta.matrix());
  Matrix mix_target = (rho + delta_cone) / (1.0 + s);
  IkCertificate mix_cert = extract_certificate(
      level, rs.mix_blocks, rs.subsets, d, 1.0 / (1.0 + s), mix_target);
  bool conv = rs.feasible && std::abs(s - closed) <= 1e-3;
  return {std::move(delta), s, std::move(delta_cert), std::move(mix_cert),
          conv};
}

PureState sample_pure(int dim, std::uint64_t rng_seed,
                      std::optional<int> min_rank) {
  if (dim < 2)
    throw InvalidStateError("sampling needs dimension >= 2, got " +
                            std::to_string(dim));
  if (min_rank && (*min_rank < 1 || *min_rank > dim))
    throw InvalidConstraintError("min coherence rank must lie in {1,...," +
                                 std::to_string(dim) + "}, got " +
                                 std::to_string(*min_rank));
  detail::Rand r(rng_seed);
  for (int tries = 0; tries < 1000; ++tries) {
    Vector c(dim);
    for (int i = 0; i < dim; ++i) c[i] = r.cnormal();
    double n = c.norm();
    if (n < 1e-9) continue;
    c /= n;
    PureState s(dim, std::move(c));
    if (!min_rank || coherence_rank(s) >= *min_rank) return s;
  }
  throw InvalidConstraintError("could not sample a state with the requested rank");
}

DensityOperator sample_in_Ik(int dim, CoherenceLevel level,
                             std::uint64_t rng_seed) {
  const int k = level.k;
  if (dim < 2)
    throw InvalidStateError("sampling needs dimension >= 2, got " +
                            std::to_string(dim));
  if (k > dim)
    throw LevelOutOfRangeError("level " + std::to_string(k) +
                               " exceeds dimension " + std::to_string(dim));
  const auto subsets = detail::k_subsets(dim, k);
  detail::Rand r(rng_seed);
  const int m = 1 + static_cast<int>(r.next() % std::uint64_t(dim * dim));
  std::vector<double> w(m);
  double tot = 0.0;
  for (int i = 0; i < m; ++i) {
    w[i] = -std::log1p(-r.uniform()) + 1e-300;
    tot += w[i];
  }
  Matrix mix = Matrix::Zero(dim, dim);
  for (int i = 0; i < m; ++i) {
    const auto& S = subsets[r.next() % subsets.size()];
    Vector v = Vector::Zero(dim);
    double n = 0.0;
    do {
      for (int a : S) v[a] = r.cnormal();
      n = v.norm();
    } while (n < 1e-9);
    v /= n;
    mix += (w[i] / tot) * (v * v.adjoint());
  }
  return DensityOperator(dim, std::move(mix));
}

std::string certificate_to_json(const IkCertificate& cert) {
  nlohmann::json j;
  j["level"] = cert.level.k;
  j["residual"] = cert.residual;
  auto comps = nlohmann::json::array();
  for (const auto& c : cert.components) {
    nlohmann::json e;
    e["weight"] = c.weight;
    auto coeffs = nlohmann::json::array();
    for (int i = 0; i < c.pure.dim(); ++i)
      coeffs.push_back({c.pure.coeffs()[i].real(), c.pure.coeffs()[i].imag()});
    e["coeffs"] = std::move(coeffs);
    comps.push_back(std::move(e));
  }
  j["components"] = std::move(comps);
  return j.dump();
}

IkCertificate certificate_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("level") || !j.contains("components") ||
      !j.contains("residual"))
    throw ParseError("certificate JSON needs 'level', 'components', 'residual'");
  if (!j["level"].is_number_integer() || !j["residual"].is_number())
    throw ParseError("certificate 'level' must be integer, 'residual' numeric");
  CoherenceLevel level(j["level"].get<int>());
  if (!j["components"].is_array() || j["components"].empty())
    throw ParseError("certificate needs at least one component");
  std::vector<IkComponent> comps;
  for (const auto& e : j["components"]) {
    if (!e.is_object() || !e.contains("weight") || !e.contains("coeffs") ||
        !e["weight"].is_number() || !e["coeffs"].is_array())
      throw ParseError("each component needs a numeric 'weight' and 'coeffs'");
    double w = e["weight"].get<double>();
    if (w <= 0.0) throw ParseError("component weights must be positive");
    Vector c(e["coeffs"].size());
    int idx = 0;
    for (const auto& pair : e["coeffs"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
          !pair[1].is_number())
        throw ParseError("coefficients must be [re, im] pairs");
      c[idx++] = Complex(pair[0].get<double>(), pair[1].get<double>());
    }
    const int cd = static_cast<int>(c.size());
    comps.push_back({w, PureState(cd, std::move(c))});
  }
  return {level, std::move(comps), j["residual"].get<double>()};
}

}  // namespace mlc
