#pragma once

// Sparse symmetric generalized eigenproblem K v = lambda M v: lowest pairs by
// blocked inverse iteration with M-orthogonal Rayleigh-Ritz, and exact
// eigenvalue counts below a level via Sylvester inertia of K - lambda* M.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "bentspec/common.hpp"

namespace bentspec {

using SpMat = Eigen::SparseMatrix<double>;

struct EigenOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0x5EED;
  int max_iter = 2000;
};

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // M-orthonormal columns
  std::vector<double> residuals;    // ||Kv - lambda Mv|| / ||Kv||
  int iterations = 0;
};

/// The k algebraically smallest eigenpairs of the pencil (K, M).
/// Deterministic for a fixed seed; single-threaded by contract.
inline EigenResult smallest_eigenpairs(const SpMat& K, const SpMat& M, int k,
                                       const EigenOptions& opts = {}) {
  const int n = static_cast<int>(K.rows());
  if (k < 1 || k > n - 1)
    throw validation_error("smallest_eigenpairs: need 1 <= k <= dim - 1");

  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success)
    throw numerical_error("smallest_eigenpairs: factorization of K failed");

  const int block = std::min(n, k + std::max(8, k / 2));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);

  Eigen::VectorXd ritz(block);
  EigenResult res;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd Y = solver.solve(M * X);
    // M-orthonormalize.
    Eigen::MatrixXd G = Y.transpose() * (M * Y);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
      // Rank loss in the block: perturb and continue.
      for (int j = 0; j < block; ++j)
        for (int i = 0; i < n; ++i) Y(i, j) += 1e-12 * gauss(rng);
      G = Y.transpose() * (M * Y);
      llt.compute(G);
      if (llt.info() != Eigen::Success)
        throw numerical_error("smallest_eigenpairs: block lost rank");
    }
    Y = llt.matrixU().solve<Eigen::OnTheRight>(Y);
    // Rayleigh-Ritz.
    Eigen::MatrixXd A = Y.transpose() * (K * Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    ritz = es.eigenvalues();
    X = Y * es.eigenvectors();

    bool done = true;
    res.residuals.assign(k, 0.0);
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd kv = K * X.col(j);
      const double rnorm = (kv - ritz(j) * (M * X.col(j))).norm() / kv.norm();
      res.residuals[j] = rnorm;
      if (!(rnorm <= opts.tol)) done = false;
    }
    res.iterations = it;
    if (done) break;
    if (it == opts.max_iter) {
      std::ostringstream msg;
      msg << "smallest_eigenpairs: no convergence after " << opts.max_iter
          << " iterations; residuals";
      for (double r : res.residuals) msg << ' ' << r;
      throw numerical_error(msg.str());
    }
  }
  res.eigenvalues.assign(ritz.data(), ritz.data() + k);
  res.eigenvectors = X.leftCols(k);
  return res;
}

/// Exact number of pencil eigenvalues below lambda_star, from the inertia of
/// K - lambda* M.  Independent of iterative convergence.
inline int count_below(const SpMat& K, const SpMat& M, double lambda_star) {
  double shift = lambda_star;
  for (int attempt = 0; attempt < 4; ++attempt) {
    SpMat C = K - shift * M;
    Eigen::SimplicialLDLT<SpMat> ldlt(C);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd d = ldlt.vectorD();
      bool ok = d.allFinite();
      double dmax = 0.0;
      for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d(i)));
      int neg = 0;
      for (int i = 0; i < d.size(); ++i) {
        if (std::abs(d(i)) <= 1e-14 * dmax) ok = false;  // singular pivot
        if (d(i) < 0.0) ++neg;
      }
      if (ok) return neg;
    }
    shift = lambda_star * (1.0 - 1e-12 * static_cast<double>(attempt + 1));
  }
  throw numerical_error("count_below: factorization breakdown after perturbation retries");
}

/// Dense reference solve of the full pencil; test oracle for small systems.
inline std::vector<double> dense_spectrum(const SpMat& K, const SpMat& M) {
  Eigen::MatrixXd Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
  if (es.info() != Eigen::Success)
    throw numerical_error("dense_spectrum: dense solver failed");
  return {es.eigenvalues().data(),
          es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace bentspec
