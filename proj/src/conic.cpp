#include "mlc/detail/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlc/detail/rand.hpp"
#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"

namespace mlc::detail {

std::vector<std::vector<int>> k_subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

Matrix psd_part(const Matrix& m) {
  Matrix h = (m + m.adjoint().eval()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
}

ConeProjector::ConeProjector(int dim, int k)
    : dim_(dim), k_(k), rho_(1.0), subsets_(k_subsets(dim, k)) {
  reset();
}

void ConeProjector::reset() {
  blocks_.assign(subsets_.size(), Matrix::Zero(k_, k_));
  zbar_ = Matrix::Zero(dim_, dim_);
  dual_ = Matrix::Zero(dim_, dim_);
  total_ = Matrix::Zero(dim_, dim_);
}

void ConeProjector::randomize(std::uint64_t seed, double scale) {
  reset();
  Rand r(seed);
  // Varying the ADMM penalty across restarts helps when one setting stalls.
  const double rhos[3] = {0.5, 1.0, 2.0};
  rho_ = rhos[r.next() % 3];
  if (scale <= 0.0) return;
  for (std::size_t i = 0; i < subsets_.size(); ++i) {
    Matrix g(k_, k_);
    for (int a = 0; a < k_; ++a)
      for (int b = 0; b < k_; ++b) g(a, b) = r.cnormal();
    Matrix b = g * g.adjoint();
    double n = b.norm();
    if (n > 0) blocks_[i] = (scale / n) * b;
    const auto& S = subsets_[i];
    for (int a = 0; a < k_; ++a)
      for (int c = 0; c < k_; ++c) total_(S[a], S[c]) += blocks_[i](a, c);
  }
}

double ConeProjector::project(const Matrix& input, int max_iters,
                              double stop_tol) {
  const int N = static_cast<int>(subsets_.size());
  const double invN = 1.0 / N;
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  Matrix corr(dim_, dim_), xbar = total_ * invN, block(k_, k_);

  double best_res = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_blocks;
  Matrix best_z, best_u;

  for (int iter = 0; iter < max_iters; ++iter) {
    corr = zbar_ - xbar - dual_;
    total_.setZero();
    for (int i = 0; i < N; ++i) {
      const auto& S = subsets_[i];
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c)
          block(a, c) = blocks_[i](a, c) + corr(S[a], S[c]);
      if (k_ == 1) {
        double v = std::max(block(0, 0).real(), 0.0);
        blocks_[i](0, 0) = v;
      } else {
        Matrix h = (block + block.adjoint().eval()) / 2.0;
        eig.compute(h);
        if (eig.eigenvalues()(0) >= 0.0) {
          blocks_[i] = h;
        } else {
          Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
          blocks_[i] = eig.eigenvectors() * vals.asDiagonal() *
                       eig.eigenvectors().adjoint();
        }
      }
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c)
          total_(S[a], S[c]) += blocks_[i](a, c);
    }
    xbar = total_ * invN;
    zbar_ = (input + rho_ * (dual_ + xbar)) / (N + rho_);
    dual_ += xbar - zbar_;

    double res = (input - total_).norm();
    if (res < best_res) {
      best_res = res;
      best_blocks = blocks_;
      best_z = zbar_;
      best_u = dual_;
    }
    if (res <= stop_tol) break;
  }

  double final_res = (input - total_).norm();
  if (best_res < final_res) {
    blocks_ = best_blocks;
    zbar_ = best_z;
    dual_ = best_u;
    total_.setZero();
    for (int i = 0; i < N; ++i) {
      const auto& S = subsets_[i];
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c)
          total_(S[a], S[c]) += blocks_[i](a, c);
    }
    final_res = best_res;
  }
  return final_res;
}

ConeDecomposer::ConeDecomposer(int dim, int k)
    : dim_(dim), k_(k), subsets_(k_subsets(dim, k)) {
  coverage_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& S : subsets_)
    for (int a : S)
      for (int b : S) coverage_(a, b) += 1.0;
  reset();
}

void ConeDecomposer::reset() {
  cold_ = true;
  drive_.assign(subsets_.size(), Matrix::Zero(k_, k_));
  blocks_ = drive_;
}

void ConeDecomposer::randomize(std::uint64_t seed, double scale) {
  reset();
  cold_ = false;
  if (scale <= 0.0) return;
  Rand r(seed);
  for (auto& z : drive_) {
    Matrix g(k_, k_);
    for (int a = 0; a < k_; ++a)
      for (int b = 0; b < k_; ++b) g(a, b) = r.cnormal();
    Matrix b = g * g.adjoint();
    double n = b.norm();
    if (n > 0) z = (scale / n) * b;
  }
}

double ConeDecomposer::decompose(const Matrix& target, int max_iters,
                                 double stop_tol) {
  const int N = static_cast<int>(subsets_.size());
  if (cold_) {
    // Spread the target evenly over the subsets covering each entry, which
    // already satisfies the matching constraint.
    for (int i = 0; i < N; ++i) {
      const auto& S = subsets_[i];
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c)
          drive_[i](a, c) = target(S[a], S[c]) / coverage_(S[a], S[c]);
    }
    cold_ = false;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_blocks;
  Matrix sum_x(dim_, dim_), sum_z(dim_, dim_), lam(dim_, dim_);

  for (int iter = 0; iter < max_iters; ++iter) {
    sum_x.setZero();
    sum_z.setZero();
    for (int i = 0; i < N; ++i) {
      const auto& S = subsets_[i];
      if (k_ == 1) {
        blocks_[i](0, 0) = std::max(drive_[i](0, 0).real(), 0.0);
      } else {
        Matrix h = (drive_[i] + drive_[i].adjoint().eval()) / 2.0;
        eig.compute(h);
        if (eig.eigenvalues()(0) >= 0.0) {
          blocks_[i] = h;
        } else {
          Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
          blocks_[i] = eig.eigenvectors() * vals.asDiagonal() *
                       eig.eigenvectors().adjoint();
        }
      }
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c) {
          sum_x(S[a], S[c]) += blocks_[i](a, c);
          sum_z(S[a], S[c]) += drive_[i](a, c);
        }
    }
    const double res = (target - sum_x).norm();
    if (res < best_res) {
      best_res = res;
      best_blocks = blocks_;
    }
    if (res <= stop_tol) break;

    // Reflect through the PSD blocks, project the reflection back onto the
    // matching constraint, and fold both steps into the driver. With the
    // entrywise constraint projection the whole update collapses to
    // z <- x + Lambda[S,S] where Lambda = (target - sum(2x - z)) / coverage.
    lam = target - 2.0 * sum_x + sum_z;
    for (int p = 0; p < dim_; ++p)
      for (int q = 0; q < dim_; ++q) {
        const double cov = coverage_(p, q);
        lam(p, q) = cov > 0.0 ? lam(p, q) / cov : Complex(0.0, 0.0);
      }
    for (int i = 0; i < N; ++i) {
      const auto& S = subsets_[i];
      for (int a = 0; a < k_; ++a)
        for (int c = 0; c < k_; ++c)
          drive_[i](a, c) = blocks_[i](a, c) + lam(S[a], S[c]);
    }
  }

  if (!best_blocks.empty()) blocks_ = std::move(best_blocks);
  return best_res;
}

RobustnessSearch robustness_single(const Matrix& rho, int k, int max_iters,
                                   double tol, std::uint64_t seed,
                                   bool randomize) {
  const int d = static_cast<int>(rho.rows());
  RobustnessSearch out;

  ConeProjector pf(d, k), pg(d, k);
  const Matrix ident = Matrix::Identity(d, d);
  Matrix z = Matrix::Zero(d, d);
  if (randomize) {
    Rand r(seed);
    z = 0.5 * random_hermitian(d, r);
    pf.randomize(splitmix64(seed), 0.3);
    pg.randomize(splitmix64(seed), 0.3);
  }

  const double step = 0.3;
  Matrix x = Matrix::Zero(d, d), y = Matrix::Zero(d, d);
  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iters; ++it) {
    const int sweeps = (it == 0) ? 300 : 30;
    pf.project(z - step * ident, sweeps, 1e-13);
    x = pf.total();
    pg.project(rho + 2.0 * x - z, sweeps, 1e-13);
    y = pg.total() - rho;
    z += y - x;
    if (it % 5 == 4 || it + 1 == max_iters) {
      gap = (x - y).norm();
      if (gap < 5e-13) break;
    }
  }
  out.gap = gap;
  out.iterations = std::min(it + 1, max_iters);
  out.s_raw = std::max(x.trace().real(), 0.0);
  out.subsets = pf.subsets();
  out.delta_blocks = pf.blocks();

  // x is a cone member by construction. When the splitting residual is tiny,
  // the second prox already holds an exact block decomposition of a cone
  // member within gap of rho + x, so it certifies the mixture directly;
  // re-projecting the boundary point from a cold start can stall.
  if (gap <= 0.25 * tol) {
    out.feasible = true;
    out.lift = 0.0;
    out.s_certified = out.s_raw;
    out.mix_residual = gap / (1.0 + out.s_raw);
    out.mix_blocks = pg.blocks();
    return out;
  }

  // Fallback for an unconverged split: lift along the maximally mixed
  // direction (interior for k >= 2, diagonal hence in the cone for k = 1
  // too) until the perturbed state certifies. Warm-start from the second
  // prox so the projector begins near the solution.
  ConeProjector pc = pg;
  double lift = 0.0;
  double res = 0.0, scale = 1.0;
  bool ok = false;
  for (int attempt = 0; attempt < 48; ++attempt) {
    scale = 1.0 + out.s_raw + lift;
    Matrix target = rho + x + (lift / d) * ident;
    res = pc.project(target, max_iters, 0.15 * tol * scale);
    if (res <= 0.6 * tol * scale) {
      ok = true;
      break;
    }
    double next = std::max({2.0 * lift, 2.0 * res, 1e-10});
    if (next > 4.0 * d) break;
    lift = next;
  }
  out.feasible = ok;
  out.lift = lift;
  out.s_certified = out.s_raw + lift;
  out.mix_residual = res / scale;
  out.mix_blocks = pc.blocks();

  if (lift > 0.0) {
    // Spread lift * I/d uniformly over the subsets: each basis index is
    // covered by N*k/d of them.
    const double cov = double(out.subsets.size()) * k / d;
    const double add = lift / (d * cov);
    for (auto& b : out.delta_blocks) b += add * Matrix::Identity(k, k);
  }
  return out;
}

RobustnessSearch robustness_search(const Matrix& rho, int k, int max_iters,
                                   int restarts, double tol,
                                   std::uint64_t seed) {
  restarts = std::max(1, restarts);
  std::vector<RobustnessSearch> results(restarts);
  int done = 0;
  const int chunk = 4;
  while (done < restarts) {
    const int m = std::min(chunk, restarts - done);
    parallel_for(m, [&](std::size_t i) {
      const int idx = done + static_cast<int>(i);
      results[idx] = robustness_single(rho, k, max_iters, tol,
                                       derive_seed(seed, idx), idx > 0);
    });
    done += m;
    std::vector<double> vals;
    for (int i = 0; i < done; ++i)
      if (results[i].feasible) vals.push_back(results[i].s_certified);
    if (vals.size() >= 2) {
      std::sort(vals.begin(), vals.end());
      if (vals[1] - vals[0] <= 1e-5) break;
    }
  }
  int best = -1;
  for (int i = 0; i < done; ++i) {
    if (!results[i].feasible) continue;
    if (best < 0 || results[i].s_certified < results[best].s_certified)
      best = i;
  }
  if (best < 0) {
    best = 0;
    for (int i = 1; i < done; ++i)
      if (results[i].s_certified < results[best].s_certified) best = i;
  }
  return std::move(results[best]);
}

}  // namespace mlc::detail
