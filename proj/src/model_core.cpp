#include "funclbm/model_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "funclbm/kernels.hpp"

namespace funclbm {

namespace {
// Stack scratch bound for the subspace dimension d.
constexpr std::size_t kMaxSubspaceDim = 64;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}  // namespace

BlockParams::BlockParams(std::size_t m, std::size_t d, std::vector<double> loadings,
                         std::vector<double> mean, std::vector<double> covariance)
    : m_(m), d_(d), loadings_(std::move(loadings)), mean_(std::move(mean)),
      covariance_(std::move(covariance)) {
  if (d_ == 0 || d_ > m_) throw InvalidInputError("block: need 1 <= d <= m");
  if (d_ > kMaxSubspaceDim)
    throw InvalidInputError("block: subspace dimension exceeds supported bound");
  if (loadings_.size() != m_ * d_ || mean_.size() != d_ || covariance_.size() != d_ * d_)
    throw InvalidInputError("block: parameter dimensions inconsistent");

  Eigen::Map<const RowMatrix> cov(covariance_.data(), d_, d_);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("block covariance is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  chol_.assign(d_ * d_, 0.0);
  double log_det = 0.0;
  for (std::size_t r = 0; r < d_; ++r) {
    for (std::size_t c = 0; c <= r; ++c) chol_[r * d_ + c] = lower(r, c);
    log_det += 2.0 * std::log(lower(r, r));
  }
  log_norm_const_ = -0.5 * static_cast<double>(d_) * std::log(2.0 * std::numbers::pi) -
                    0.5 * log_det;
}

long long BlockParams::param_count() const {
  const long long m = static_cast<long long>(m_);
  const long long d = static_cast<long long>(d_);
  return m * d + d + d * (d + 1) / 2;
}

void BlockParams::project(std::span<const double> c, std::span<double> out) const {
  for (std::size_t r = 0; r < d_; ++r)
    out[r] = kernels::dot(c.data(), loadings_.data() + r * m_, m_);
}

double BlockParams::log_density(std::span<const double> c) const {
  if (c.size() != m_) throw InvalidInputError("block density: coefficient length mismatch");
  double v[kMaxSubspaceDim];
  project(c, {v, d_});
  // Forward-substitute L y = (v - mean); the quadratic form is |y|^2.
  double quad = 0.0;
  for (std::size_t r = 0; r < d_; ++r) {
    double acc = v[r] - mean_[r];
    const double* lrow = chol_.data() + r * d_;
    for (std::size_t cidx = 0; cidx < r; ++cidx) acc -= lrow[cidx] * v[cidx];
    v[r] = acc / lrow[r];  // reuse v as the solve scratch
    quad += v[r] * v[r];
  }
  return log_norm_const_ - 0.5 * quad;
}

void BlockParams::check_invariants(double ortho_tol, double sym_tol) const {
  for (std::size_t a = 0; a < d_; ++a) {
    for (std::size_t b = a; b < d_; ++b) {
      const double g =
          kernels::dot(loadings_.data() + a * m_, loadings_.data() + b * m_, m_);
      const double want = a == b ? 1.0 : 0.0;
      if (std::abs(g - want) > ortho_tol)
        throw NumericError("block loadings are not orthonormal");
    }
  }
  for (std::size_t r = 0; r < d_; ++r)
    for (std::size_t c = 0; c < r; ++c)
      if (std::abs(covariance_[r * d_ + c] - covariance_[c * d_ + r]) > sym_tol)
        throw NumericError("block covariance is not symmetric");
}

void ModelState::check_invariants(double simplex_tol) const {
  validate_structure(structure);
  const auto check_simplex = [simplex_tol](const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) {
      if (!(x > 0.0)) throw NumericError("mixing proportion not positive");
      total += x;
    }
    if (std::abs(total - 1.0) > simplex_tol)
      throw NumericError("mixing proportions do not sum to 1");
  };
  if (rho.size() != static_cast<std::size_t>(structure.L))
    throw InvalidInputError("model: rho dimension mismatch");
  check_simplex(rho);
  if (pi.size() != static_cast<std::size_t>(structure.L) ||
      blocks.size() != static_cast<std::size_t>(structure.L))
    throw InvalidInputError("model: per-cluster dimension mismatch");
  for (int ell = 0; ell < structure.L; ++ell) {
    if (pi[ell].size() != static_cast<std::size_t>(structure.K[ell]) ||
        blocks[ell].size() != static_cast<std::size_t>(structure.K[ell]))
      throw InvalidInputError("model: K_l dimension mismatch");
    check_simplex(pi[ell]);
    for (const BlockParams& b : blocks[ell]) b.check_invariants();
  }
}

double block_log_density(std::span<const double> c, const BlockParams& params) {
  return params.log_density(c);
}

double row_log_density(const CoefficientGrid& grid, std::size_t i,
                       const std::vector<int>& col_labels, int ell, int k,
                       const ModelState& state) {
  const BlockParams& block = state.block(ell, k);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.p; ++j)
    if (col_labels[j] == ell) acc += block.log_density(grid.cell(i, j));
  return acc;
}

double column_log_density(const CoefficientGrid& grid, std::size_t j,
                          const std::vector<std::vector<int>>& row_labels,
                          int ell, const ModelState& state) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i)
    acc += state.block(ell, row_labels[ell][i]).log_density(grid.cell(i, j));
  return acc;
}

double complete_log_likelihood(const CoefficientGrid& grid,
                               const PartitionPair& partition,
                               const ModelState& state) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.p; ++j) acc += std::log(state.rho[partition.col_labels[j]]);
  for (int ell = 0; ell < state.structure.L; ++ell)
    for (std::size_t i = 0; i < grid.n; ++i)
      acc += std::log(state.pi[ell][partition.row_labels[ell][i]]);
  for (std::size_t i = 0; i < grid.n; ++i) {
    for (std::size_t j = 0; j < grid.p; ++j) {
      const int ell = partition.col_labels[j];
      const int k = partition.row_labels[ell][i];
      acc += state.block(ell, k).log_density(grid.cell(i, j));
    }
  }
  return acc;
}

}  // namespace funclbm
