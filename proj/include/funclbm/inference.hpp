#pragma once

// SEM-Gibbs inference: alternate stochastic assignment of row clusters (per
// column cluster) and column clusters with parameter re-estimation.
//
// Update order per iteration: M step on the current partition, then row
// draws conditioned on the current column labels, then column draws using
// the freshly drawn row labels. The likelihood trace records the
// complete-data log-likelihood of each (partition, fitted state) snapshot,
// and the post-burn-in maximum is returned.
//
// Every random draw uses a substream derived from (seed, iteration, phase,
// index), so parallel and serial execution of one run are bit-identical.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "funclbm/model_core.hpp"
#include "funclbm/rng.hpp"
#include "funclbm/types.hpp"

namespace funclbm {

struct SemGibbsConfig {
  int max_iterations = 100;
  int burn_in = 20;
  double convergence_tol = 1e-6;
  int convergence_window = 5;
  std::uint64_t seed = 0;
  // Subspace dimension: fixed_d > 0 pins d (clamped to each block's rank),
  // otherwise the smallest d explaining variance_threshold of the block
  // variance is chosen, capped at max_d.
  int fixed_d = 0;
  double variance_threshold = 0.9;
  int max_d = 10;

  void validate() const;
};

struct SemGibbsResult {
  ModelState best_state;
  PartitionPair best_partition;
  double best_log_likelihood = 0.0;
  std::vector<double> likelihood_trace;
  int iterations_run = 0;
  int degeneracy_events = 0;
  bool converged = false;
};

// FunLBM runs the same machinery with one shared row partition.
enum class RowCoupling { independent, shared };

// Substream context for one SE phase of one iteration.
struct GibbsRng {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;

  Rng substream(std::uint64_t phase, std::uint64_t index) const {
    return Rng(derive_seed(seed, iteration, phase, index));
  }
};

// Per-iteration cache of every cell's log-density under every block.
class DensityTensor {
 public:
  DensityTensor(const CoefficientGrid& grid, const ModelState& state);

  double at(int ell, int k, std::size_t i, std::size_t j) const {
    return values_[(offsets_[ell] + k) * cells_ + i * p_ + j];
  }
  const CoClusterStructure& structure() const { return structure_; }

 private:
  CoClusterStructure structure_;
  std::size_t p_ = 0;
  std::size_t cells_ = 0;
  std::vector<std::size_t> offsets_;  // per ell, slab index of (ell, k=0)
  std::vector<double> values_;
};

// Max-subtraction normalization of log weights into probabilities.
std::vector<double> posterior_from_log_weights(std::span<const double> lw);

// Moves random items into empty clusters (and into 1-cell blocks when a
// donor exists) so the M step sees no empty block. Returns the keys of the
// repaired clusters: column cluster ell has key -(ell+1), row cluster (ell,
// k) has key ell * max_K + k.
std::vector<int> repair_partition(std::size_t n, std::size_t p,
                                  const CoClusterStructure& structure,
                                  PartitionPair& partition, Rng& rng);

// Mixing proportions from label counts plus per-block PCA-Gaussian
// estimation. Requires every cluster nonempty.
ModelState m_step(const CoefficientGrid& grid, const PartitionPair& partition,
                  const CoClusterStructure& structure, const SemGibbsConfig& config);

// Draws row labels per column cluster (independent coupling) or one shared
// label per row (shared coupling). Uses phase 0 substreams.
void se_step_rows(const CoefficientGrid& grid, PartitionPair& partition,
                  const ModelState& state, const GibbsRng& rng,
                  RowCoupling coupling = RowCoupling::independent);
void se_step_rows(const DensityTensor& tensor, PartitionPair& partition,
                  const ModelState& state, const GibbsRng& rng,
                  RowCoupling coupling = RowCoupling::independent);

// Draws column labels using the current row labels. Phase 1 substreams.
void se_step_columns(const CoefficientGrid& grid, PartitionPair& partition,
                     const ModelState& state, const GibbsRng& rng);
void se_step_columns(const DensityTensor& tensor, PartitionPair& partition,
                     const ModelState& state, const GibbsRng& rng);

SemGibbsResult run_sem_gibbs(const CoefficientGrid& grid,
                             const PartitionPair& initial_partition,
                             const CoClusterStructure& structure,
                             const SemGibbsConfig& config,
                             RowCoupling coupling = RowCoupling::independent);

using Initializer = std::function<PartitionPair(
    const CoefficientGrid&, const CoClusterStructure&, std::uint64_t seed)>;

// n_runs independent runs with seeds config.seed + i; returns the run with
// the highest best_log_likelihood (ties: lowest run index). Runs that hit a
// degenerate structure are dropped unless all of them do.
SemGibbsResult run_concurrent(const CoefficientGrid& grid,
                              const CoClusterStructure& structure,
                              const SemGibbsConfig& config, int n_runs,
                              const Initializer& initializer,
                              RowCoupling coupling = RowCoupling::independent);

// Same, but every run starts from the given partition.
SemGibbsResult run_concurrent(const CoefficientGrid& grid,
                              const CoClusterStructure& structure,
                              const SemGibbsConfig& config, int n_runs,
                              const PartitionPair& initial_partition,
                              RowCoupling coupling = RowCoupling::independent);

}  // namespace funclbm
