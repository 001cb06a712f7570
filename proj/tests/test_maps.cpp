#include <cmath>

#include <doctest.h>

#include "mlc/detail/rand.hpp"
#include "mlc/maps.hpp"
#include "mlc/measures.hpp"
#include "mlc/oracles.hpp"
#include "mlc/rng.hpp"
#include "mlc/statespace.hpp"

using namespace mlc;

namespace {

PureState uniform_state(int dim, int rank) {
  Vector c = Vector::Zero(dim);
  for (int i = 0; i < rank; ++i) c[i] = 1.0 / std::sqrt(double(rank));
  return PureState(dim, c);
}

DensityOperator mixed_state(int dim) {
  return DensityOperator(dim, Matrix(Matrix::Identity(dim, dim) / double(dim)));
}

// random effect with eigenvalues drawn uniformly from [0, 1]
Matrix random_effect(int dim, std::uint64_t seed) {
  detail::Rand rng(seed);
  const Matrix h = detail::random_hermitian(dim, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector vals(dim);
  for (int i = 0; i < dim; ++i) vals[i] = rng.uniform();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("identity and zero effects select a single outcome") {
  const DensityOperator rho1 = outer_product(maximally_coherent(3));
  const DensityOperator rho2 = mixed_state(3);
  const DensityOperator sigma = sample_in_Ik(3, CoherenceLevel(3), 5);

  const TwoOutcomeMap all_first = build_two_outcome(Matrix::Identity(3, 3), rho1, rho2, 1.0);
  CHECK(max_abs_diff(apply(all_first, sigma).matrix(), rho1.matrix()) <= 1e-12);

  const TwoOutcomeMap all_second = build_two_outcome(Matrix::Zero(3, 3), rho1, rho2, 1.0);
  CHECK(max_abs_diff(apply(all_second, sigma).matrix(), rho2.matrix()) <= 1e-12);
}

TEST_CASE("two outcome construction rejects invalid pieces") {
  const DensityOperator rho1 = outer_product(maximally_coherent(3));
  const DensityOperator rho2 = mixed_state(3);
  const Matrix eye = Matrix::Identity(3, 3);

  CHECK_THROWS_AS(build_two_outcome(1.5 * eye, rho1, rho2, 1.0), InvalidEffectError);
  CHECK_THROWS_AS(build_two_outcome(-0.1 * eye, rho1, rho2, 1.0), InvalidEffectError);
  Matrix asym = eye;
  asym(0, 1) = 0.4;
  CHECK_THROWS_AS(build_two_outcome(asym, rho1, rho2, 1.0), InvalidEffectError);

  CHECK_THROWS_AS(build_two_outcome(eye, rho1, rho2, 0.0), InvalidScaleError);
  CHECK_THROWS_AS(build_two_outcome(eye, rho1, rho2, 1.5), InvalidScaleError);
  CHECK_THROWS_AS(build_two_outcome(eye, rho1, rho2, -0.3), InvalidScaleError);

  CHECK_THROWS_AS(build_two_outcome(eye, rho1, mixed_state(4), 1.0), InvalidStateError);
  const DensityOperator sub(3, Matrix(0.5 * Matrix::Identity(3, 3) / 3.0));
  CHECK_THROWS_AS(build_two_outcome(eye, sub, rho2, 1.0), InvalidStateError);
}

TEST_CASE("trace contract holds for random maps and inputs") {
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + trial % 2;
    detail::Rand rng(derive_seed(606, trial));
    const double p = 0.05 + 0.95 * rng.uniform();
    const TwoOutcomeMap map =
        build_two_outcome(random_effect(d, derive_seed(707, trial)),
                          outer_product(sample_pure(d, derive_seed(1, trial))),
                          outer_product(sample_pure(d, derive_seed(2, trial))), p);
    const DensityOperator sigma = sample_in_Ik(d, CoherenceLevel(d), derive_seed(3, trial));
    const DensityOperator out = apply(map, sigma);
    const double t1 =
        (map.effect() * sigma.matrix()).trace().real();
    CHECK(std::abs(out.trace() - (sigma.trace() - (1.0 - p) * t1)) <= 1e-10);
    CHECK(out.trace() <= sigma.trace() + 1e-12);
  }
}

TEST_CASE("unit scale maps preserve the trace exactly") {
  for (int trial = 0; trial < 10; ++trial) {
    const TwoOutcomeMap map =
        build_two_outcome(random_effect(3, derive_seed(808, trial)),
                          outer_product(sample_pure(3, derive_seed(4, trial))),
                          outer_product(sample_pure(3, derive_seed(5, trial))), 1.0);
    const DensityOperator sigma = sample_in_Ik(3, CoherenceLevel(2), derive_seed(6, trial));
    CHECK(std::abs(apply(map, sigma).trace() - sigma.trace()) <= 1e-12);
  }
}

TEST_CASE("conversion-shaped maps act as expected on the source") {
  const PureState psi1 = sample_pure(4, 11, 4);
  const PureState psi2 = sample_pure(4, 22, 4);
  const DensityOperator delta = mixed_state(4);

  const TwoOutcomeMap partial =
      build_two_outcome(outer_product(psi1).matrix(), outer_product(psi2), delta, 0.7);
  const DensityOperator out = apply(partial, outer_product(psi1));
  CHECK(max_abs_diff(out.matrix(), 0.7 * outer_product(psi2).matrix()) <= 1e-12);

  const TwoOutcomeMap full =
      build_two_outcome(outer_product(psi1).matrix(), outer_product(psi2), delta, 1.0);
  CHECK(max_abs_diff(apply(full, outer_product(psi1)).matrix(),
                     outer_product(psi2).matrix()) <= 1e-12);

  // an input orthogonal to the source lands on the second outcome
  Vector perp = Vector::Zero(4);
  const Vector c = psi1.coeffs();
  perp[0] = -std::conj(c[1]);
  perp[1] = std::conj(c[0]);
  perp.normalize();
  const PureState orth(4, perp);
  CHECK(std::abs((outer_product(psi1).matrix() * outer_product(orth).matrix()).trace()) <=
        1e-12);
  CHECK(max_abs_diff(apply(full, outer_product(orth)).matrix(), delta.matrix()) <= 1e-12);
}

TEST_CASE("apply is linear in the input") {
  const TwoOutcomeMap map =
      build_two_outcome(random_effect(3, 99), outer_product(sample_pure(3, 7)),
                        outer_product(sample_pure(3, 8)), 0.6);
  const DensityOperator a = sample_in_Ik(3, CoherenceLevel(3), 41);
  const DensityOperator b = sample_in_Ik(3, CoherenceLevel(3), 42);
  const Matrix combo = 0.3 * a.matrix() + 0.7 * b.matrix();
  const Matrix lhs = apply(map, DensityOperator(3, combo)).matrix();
  const Matrix rhs =
      0.3 * apply(map, a).matrix() + 0.7 * apply(map, b).matrix();
  CHECK(max_abs_diff(lhs, rhs) <= 1e-10);
}

TEST_CASE("building the conversion map validates inputs") {
  const PureState mc4 = maximally_coherent(4);
  const PureState target = sample_pure(4, 17, 3);
  const CoherenceLevel k2(2);

  CHECK_THROWS_AS(build_k_preserving(mc4, target, k2, 1.5, {}), InvalidScaleError);
  CHECK_THROWS_AS(build_k_preserving(mc4, target, k2, 0.0, {}), InvalidScaleError);
  CHECK_THROWS_AS(build_k_preserving(mc4, target, CoherenceLevel(4), 1.0, {}),
                  LevelOutOfRangeError);
  CHECK_THROWS_AS(build_k_preserving(mc4, maximally_coherent(3), k2, 1.0, {}),
                  InvalidStateError);

  CHECK_THROWS_AS(build_k_preserving(uniform_state(4, 2), target, k2, 1.0, {}),
                  NotResourceStateError);
  CHECK_THROWS_AS(build_k_preserving(mc4, uniform_state(4, 2), k2, 1.0, {}),
                  NotResourceStateError);
  try {
    build_k_preserving(uniform_state(4, 2), target, k2, 1.0, {});
  } catch (const NotResourceStateError& e) {
    CHECK(e.which() == "source");
  }
}

TEST_CASE("scales above the conversion bound are rejected with the bound attached") {
  Vector c(4);
  c << std::sqrt(0.85), std::sqrt(0.10), std::sqrt(0.04), std::sqrt(0.01);
  const PureState low_g(4, c);
  const PureState mc4 = maximally_coherent(4);
  const double g = geometric_k(low_g, CoherenceLevel(3)).value;
  const double r = robustness_k(mc4, CoherenceLevel(2)).value;
  const double bound = g / (r * (1.0 - g));
  REQUIRE(bound < 0.9);

  CHECK_THROWS_AS(build_k_preserving(low_g, mc4, CoherenceLevel(2), 0.9, {}),
                  BoundViolationError);
  try {
    build_k_preserving(low_g, mc4, CoherenceLevel(2), 0.9, {});
  } catch (const BoundViolationError& e) {
    CHECK(e.bound() == doctest::Approx(bound).epsilon(1e-12));
    CHECK(std::string(e.what()).find("bound") != std::string::npos);
  }

  // at the bound itself the construction goes through
  CHECK_NOTHROW(build_k_preserving(low_g, mc4, CoherenceLevel(2), bound, {}));
}

TEST_CASE("constructed conversion map sends the source to the target") {
  const PureState mc4 = maximally_coherent(4);
  const PureState target = sample_pure(4, 23, 3);
  const KCoherencePreservingMap map = build_k_preserving(mc4, target, CoherenceLevel(2), 1.0, {});
  CHECK(map.level.k == 2);
  CHECK(map.base.scale() == 1.0);
  CHECK(max_abs_diff(apply(map.base, outer_product(mc4)).matrix(),
                     outer_product(target).matrix()) <= 1e-10);
  CHECK(map.delta_cert.converged);
}

TEST_CASE("verification confirms the map preserves the free set") {
  const PureState mc4 = maximally_coherent(4);
  const PureState target = sample_pure(4, 29, 4);
  const KCoherencePreservingMap map = build_k_preserving(mc4, target, CoherenceLevel(2), 1.0, {});
  const VerificationReport report = verify_preserves_Ik(map, 16, {}, 97);
  CHECK(report.trials == 16);
  CHECK(report.all_ok());
  REQUIRE(report.records.size() == 16);
  const double g_next = geometric_k(mc4, CoherenceLevel(3)).value;
  for (const auto& rec : report.records) {
    CHECK(rec.trace_error <= 1e-10);
    CHECK(rec.residual <= 1e-7);
    // free inputs cannot overlap the source beyond 1 - G_{k+1}(source)
    CHECK(rec.overlap <= 1.0 - g_next + 1e-9);
  }
}

TEST_CASE("verification also passes below the maximal probability") {
  const PureState source = sample_pure(4, 301, 3);
  const PureState target = sample_pure(4, 302, 3);
  const double g = geometric_k(source, CoherenceLevel(3)).value;
  const double r = robustness_k(target, CoherenceLevel(2)).value;
  const double p = 0.5 * std::min(1.0, g / (r * (1.0 - g)));
  const KCoherencePreservingMap map =
      build_k_preserving(source, target, CoherenceLevel(2), p, {});
  const VerificationReport report = verify_preserves_Ik(map, 12, {}, 55);
  CHECK(report.all_ok());
}

TEST_CASE("map json round trips through the affine action") {
  const PureState mc4 = maximally_coherent(4);
  const PureState target = sample_pure(4, 83, 3);
  const KCoherencePreservingMap map =
      build_k_preserving(mc4, target, CoherenceLevel(2), 0.8, {});
  const std::string text = map_to_json(map);
  const TwoOutcomeMap back = two_outcome_from_json(text);
  CHECK(back.scale() == map.base.scale());
  for (int trial = 0; trial < 5; ++trial) {
    const DensityOperator sigma = sample_in_Ik(4, CoherenceLevel(2), derive_seed(9, trial));
    CHECK(max_abs_diff(apply(back, sigma).matrix(), apply(map.base, sigma).matrix()) == 0.0);
  }
}

TEST_CASE("map json rejects malformed input") {
  CHECK_THROWS_AS(two_outcome_from_json("{"), ParseError);
  CHECK_THROWS_AS(two_outcome_from_json(R"({"dim": 3, "scale": 1.0})"), ParseError);
  CHECK_THROWS_AS(
      two_outcome_from_json(
          R"({"dim": 2, "scale": 1.0, "effect": [[1,0]], "out1": [[1,0]], "out2": [[1,0]]})"),
      ParseError);
}
