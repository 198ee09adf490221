#pragma once

// FunCLBM parameterization and density evaluation. Each block (k, ell)
// carries an m x d orthonormal loadings matrix, and a Gaussian N(mean,
// covariance) on the d-dimensional projections v = A^T c of its cells'
// coefficient vectors. Densities are evaluated in the projected subspace
// only, in log space throughout.

#include <cstddef>
#include <span>
#include <vector>

#include "funclbm/types.hpp"

namespace funclbm {

class BlockParams {
 public:
  BlockParams() = default;

  // loadings: column-major m x d (column r holds the r-th basis vector);
  // covariance: row-major d x d, symmetric positive definite. Factorizes the
  // covariance immediately; throws NumericError if it is not SPD.
  BlockParams(std::size_t m, std::size_t d, std::vector<double> loadings,
              std::vector<double> mean, std::vector<double> covariance);

  std::size_t m() const { return m_; }
  std::size_t d() const { return d_; }
  const std::vector<double>& loadings() const { return loadings_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& covariance() const { return covariance_; }

  // nu = m*d + d + d(d+1)/2
  long long param_count() const;

  // Projects c through the loadings: out[r] = dot(c, A.col(r)).
  void project(std::span<const double> c, std::span<double> out) const;

  double log_density(std::span<const double> c) const;

  // Invariant checks used by tests and deserialization: orthonormal columns
  // within ortho_tol, symmetric covariance within sym_tol.
  void check_invariants(double ortho_tol = 1e-8, double sym_tol = 1e-10) const;

 private:
  std::size_t m_ = 0;
  std::size_t d_ = 0;
  std::vector<double> loadings_;
  std::vector<double> mean_;
  std::vector<double> covariance_;
  // Cached factorization of the covariance.
  std::vector<double> chol_;  // row-major lower triangular d x d
  double log_norm_const_ = 0.0;  // -d/2 log(2pi) - 1/2 log det
};

struct ModelState {
  CoClusterStructure structure;
  std::vector<double> rho;                    // L
  std::vector<std::vector<double>> pi;        // per ell, K_ell
  std::vector<std::vector<BlockParams>> blocks;  // [ell][k]

  const BlockParams& block(int ell, int k) const { return blocks[ell][k]; }

  // Simplex and block invariants; throws on violation.
  void check_invariants(double simplex_tol = 1e-10) const;
};

double block_log_density(std::span<const double> c, const BlockParams& params);

// Sum of cell log-densities of row i over the columns assigned to cluster
// ell, under that cluster's row cluster k. Empty column set gives 0.
double row_log_density(const CoefficientGrid& grid, std::size_t i,
                       const std::vector<int>& col_labels, int ell, int k,
                       const ModelState& state);

// Sum over all rows of column j's cell log-density under block
// (row_labels[ell][i], ell).
double column_log_density(const CoefficientGrid& grid, std::size_t j,
                          const std::vector<std::vector<int>>& row_labels,
                          int ell, const ModelState& state);

// log rho_w + log pi membership terms (over all i, ell) + all cell terms.
double complete_log_likelihood(const CoefficientGrid& grid,
                               const PartitionPair& partition,
                               const ModelState& state);

}  // namespace funclbm
