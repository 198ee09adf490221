#include "funclbm/inference.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "funclbm/kernels.hpp"
#include "funclbm/parallel.hpp"

namespace funclbm {

namespace {

constexpr std::uint64_t kPhaseRows = 0;
constexpr std::uint64_t kPhaseCols = 1;
constexpr std::uint64_t kPhaseRepair = 2;

// Draw loops are cheap per item; only very large label vectors are worth
// forking threads for.
constexpr std::size_t kDrawGrain = 4096;

std::vector<int> count_labels(const std::vector<int>& labels, int clusters) {
  std::vector<int> counts(clusters, 0);
  for (int l : labels) ++counts[l];
  return counts;
}

// Picks a random item whose current cluster keeps >= 2 members.
std::optional<std::size_t> pick_donor(const std::vector<int>& labels,
                                      const std::vector<int>& counts, int target,
                                      Rng& rng) {
  std::vector<std::size_t> donors;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != target && counts[labels[i]] >= 2) donors.push_back(i);
  if (donors.empty()) return std::nullopt;
  return donors[rng.uniform_int(donors.size())];
}

// Moves items into `target` until it holds `want` members (or donors run
// out). Returns whether anything moved.
bool refill_cluster(std::vector<int>& labels, std::vector<int>& counts, int target,
                    int want, Rng& rng) {
  bool moved = false;
  while (counts[target] < want) {
    const auto donor = pick_donor(labels, counts, target, rng);
    if (!donor) break;
    --counts[labels[*donor]];
    labels[*donor] = target;
    ++counts[target];
    moved = true;
  }
  return moved;
}

}  // namespace

void SemGibbsConfig::validate() const {
  if (max_iterations < 1) throw InvalidInputError("config: max_iterations must be >= 1");
  if (burn_in < 0 || burn_in >= max_iterations)
    throw InvalidInputError("config: need 0 <= burn_in < max_iterations");
  if (!(convergence_tol > 0.0)) throw InvalidInputError("config: convergence_tol must be > 0");
  if (convergence_window < 1) throw InvalidInputError("config: convergence_window must be >= 1");
  if (fixed_d == 0 && !(variance_threshold > 0.0 && variance_threshold < 1.0))
    throw InvalidInputError("config: variance_threshold must be in (0, 1)");
  if (max_d < 1) throw InvalidInputError("config: max_d must be >= 1");
}

DensityTensor::DensityTensor(const CoefficientGrid& grid, const ModelState& state)
    : structure_(state.structure), p_(grid.p), cells_(grid.n * grid.p) {
  offsets_.resize(structure_.L);
  std::size_t slabs = 0;
  for (int ell = 0; ell < structure_.L; ++ell) {
    offsets_[ell] = slabs;
    slabs += structure_.K[ell];
  }
  values_.resize(slabs * cells_);

  // One task per (slab, row): big enough to amortize threads, fixed layout
  // so scheduling cannot affect results.
  parallel_for(slabs * grid.n, [&](std::size_t task) {
    const std::size_t slab = task / grid.n;
    const std::size_t i = task % grid.n;
    int ell = structure_.L - 1;
    while (offsets_[ell] > slab) --ell;
    const int k = static_cast<int>(slab - offsets_[ell]);
    const BlockParams& block = state.block(ell, k);
    double* out = values_.data() + slab * cells_ + i * p_;
    for (std::size_t j = 0; j < p_; ++j) out[j] = block.log_density(grid.cell(i, j));
  });
}

std::vector<double> posterior_from_log_weights(std::span<const double> lw) {
  double maxw = -std::numeric_limits<double>::infinity();
  for (double w : lw) maxw = std::max(maxw, w);
  if (!std::isfinite(maxw)) throw NumericError("posterior: no finite log weight");
  std::vector<double> probs(lw.size());
  double total = 0.0;
  for (std::size_t k = 0; k < lw.size(); ++k) {
    probs[k] = std::exp(lw[k] - maxw);
    total += probs[k];
  }
  for (double& v : probs) v /= total;
  return probs;
}

std::vector<int> repair_partition(std::size_t n, std::size_t p,
                                  const CoClusterStructure& structure,
                                  PartitionPair& partition, Rng& rng) {
  validate_partition(partition, n, p, structure);
  const int L = structure.L;
  const int max_k = *std::max_element(structure.K.begin(), structure.K.end());
  std::vector<int> repaired;

  std::vector<int> col_counts = count_labels(partition.col_labels, L);
  for (int ell = 0; ell < L; ++ell) {
    if (col_counts[ell] > 0) continue;
    const int want = std::max<int>(1, static_cast<int>(p) / (2 * L));
    if (refill_cluster(partition.col_labels, col_counts, ell, want, rng))
      repaired.push_back(-(ell + 1));
  }

  for (int ell = 0; ell < L; ++ell) {
    std::vector<int> row_counts = count_labels(partition.row_labels[ell], structure.K[ell]);
    for (int k = 0; k < structure.K[ell]; ++k) {
      bool deficient = row_counts[k] == 0;
      // 1-cell block: lone row in a lone column.
      if (row_counts[k] == 1 && col_counts[ell] == 1) deficient = true;
      if (!deficient) continue;
      const int want = std::max<int>(row_counts[k] + 1,
                                     static_cast<int>(n) / (2 * structure.K[ell]));
      if (refill_cluster(partition.row_labels[ell], row_counts, k, want, rng))
        repaired.push_back(ell * max_k + k);
    }
  }
  return repaired;
}

ModelState m_step(const CoefficientGrid& grid, const PartitionPair& partition,
                  const CoClusterStructure& structure, const SemGibbsConfig& config) {
  config.validate();
  validate_partition(partition, grid.n, grid.p, structure);
  const int L = structure.L;
  const std::size_t m = grid.m;

  ModelState state;
  state.structure = structure;
  state.rho.resize(L);
  state.pi.resize(L);
  state.blocks.resize(L);

  const std::vector<int> col_counts = count_labels(partition.col_labels, L);
  std::vector<std::vector<int>> row_counts(L);
  for (int ell = 0; ell < L; ++ell) {
    if (col_counts[ell] == 0)
      throw DegenerateStructureError("m_step: empty column cluster " + std::to_string(ell));
    state.rho[ell] = static_cast<double>(col_counts[ell]) / static_cast<double>(grid.p);
    row_counts[ell] = count_labels(partition.row_labels[ell], structure.K[ell]);
    state.pi[ell].resize(structure.K[ell]);
    state.blocks[ell].resize(structure.K[ell]);
    for (int k = 0; k < structure.K[ell]; ++k) {
      if (row_counts[ell][k] == 0)
        throw DegenerateStructureError("m_step: empty row cluster (" + std::to_string(ell) +
                                       "," + std::to_string(k) + ")");
      state.pi[ell][k] =
          static_cast<double>(row_counts[ell][k]) / static_cast<double>(grid.n);
    }
  }

  // Flatten block jobs for the parallel loop.
  std::vector<std::pair<int, int>> jobs;
  for (int ell = 0; ell < L; ++ell)
    for (int k = 0; k < structure.K[ell]; ++k) jobs.emplace_back(ell, k);

  parallel_for(jobs.size(), [&](std::size_t job) {
    const auto [ell, k] = jobs[job];

    std::vector<const double*> cells;
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (partition.row_labels[ell][i] != k) continue;
      for (std::size_t j = 0; j < grid.p; ++j)
        if (partition.col_labels[j] == ell) cells.push_back(grid.cell(i, j).data());
    }
    const std::size_t count = cells.size();

    std::vector<double> mean_vec(m, 0.0);
    for (const double* c : cells)
      for (std::size_t t = 0; t < m; ++t) mean_vec[t] += c[t];
    for (double& v : mean_vec) v /= static_cast<double>(count);

    // Centered scatter, upper triangle only.
    std::vector<double> scatter(m * m, 0.0);
    std::vector<double> centered(m);
    for (const double* c : cells) {
      for (std::size_t t = 0; t < m; ++t) centered[t] = c[t] - mean_vec[t];
      kernels::rank1_update(scatter.data(), centered.data(), m);
    }
    Eigen::MatrixXd cov(m, m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = r; c < m; ++c)
        cov(r, c) = cov(c, r) = scatter[r * m + c] / static_cast<double>(count);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
      throw NumericError("m_step: eigendecomposition failed");
    // Ascending eigenvalues; read from the back for the leading ones.
    const Eigen::VectorXd& evals = eig.eigenvalues();
    double total = 0.0;
    for (std::size_t t = 0; t < m; ++t) total += std::max(0.0, evals[t]);

    int rank = 0;
    for (std::size_t t = 0; t < m; ++t)
      if (evals[m - 1 - t] > total * 1e-12 && evals[m - 1 - t] > 0.0) ++rank;

    int d;
    const int cap = static_cast<int>(std::min<long long>(
        {static_cast<long long>(config.max_d), static_cast<long long>(m),
         std::max<long long>(1, static_cast<long long>(count) - 1)}));
    if (config.fixed_d > 0) {
      d = std::clamp(config.fixed_d, 1, std::max(rank, 1));
      d = std::min<int>(d, static_cast<int>(m));
    } else {
      d = 1;
      double cum = std::max(0.0, evals[m - 1]);
      while (d < std::max(rank, 1) && total > 0.0 &&
             cum < config.variance_threshold * total) {
        cum += std::max(0.0, evals[m - 1 - d]);
        ++d;
      }
    }
    d = std::min(d, std::max(1, cap));

    // Leading eigenvectors, sign-canonicalized on the largest component.
    std::vector<double> loadings(m * d);
    for (int r = 0; r < d; ++r) {
      Eigen::VectorXd v = eig.eigenvectors().col(m - 1 - r);
      std::size_t arg = 0;
      for (std::size_t t = 1; t < m; ++t)
        if (std::abs(v[t]) > std::abs(v[arg])) arg = t;
      if (v[arg] < 0.0) v = -v;
      for (std::size_t t = 0; t < m; ++t) loadings[r * m + t] = v[t];
    }

    // Uncentered projections; mean and biased covariance in the subspace.
    std::vector<double> projections(count * d);
    for (std::size_t c = 0; c < count; ++c)
      for (int r = 0; r < d; ++r)
        projections[c * d + r] = kernels::dot(cells[c], loadings.data() + r * m, m);

    std::vector<double> mu(d, 0.0);
    for (std::size_t c = 0; c < count; ++c)
      for (int r = 0; r < d; ++r) mu[r] += projections[c * d + r];
    for (double& v : mu) v /= static_cast<double>(count);

    std::vector<double> sigma(d * d, 0.0);
    std::vector<double> dev(d);
    for (std::size_t c = 0; c < count; ++c) {
      for (int r = 0; r < d; ++r) dev[r] = projections[c * d + r] - mu[r];
      kernels::rank1_update(sigma.data(), dev.data(), d);
    }
    double trace = 0.0;
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) {
        sigma[r * d + c] /= static_cast<double>(count);
        sigma[c * d + r] = sigma[r * d + c];
      }
      trace += sigma[r * d + r];
    }
    const double lambda = trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
    for (int r = 0; r < d; ++r) sigma[r * d + r] += lambda;

    state.blocks[ell][k] = BlockParams(m, static_cast<std::size_t>(d),
                                       std::move(loadings), std::move(mu),
                                       std::move(sigma));
  });

  return state;
}

namespace {

void draw_rows_independent(const DensityTensor& tensor, PartitionPair& partition,
                           const ModelState& state, const GibbsRng& rng,
                           std::size_t n, std::size_t p) {
  const CoClusterStructure& structure = state.structure;
  for (int ell = 0; ell < structure.L; ++ell) {
    const int K = structure.K[ell];
    if (K == 1) {
      std::fill(partition.row_labels[ell].begin(), partition.row_labels[ell].end(), 0);
      continue;
    }
    std::vector<int>& labels = partition.row_labels[ell];
    parallel_for(
        n,
        [&](std::size_t i) {
          std::vector<double> lw(K);
          for (int k = 0; k < K; ++k) {
            double acc = std::log(state.pi[ell][k]);
            for (std::size_t j = 0; j < p; ++j)
              if (partition.col_labels[j] == ell) acc += tensor.at(ell, k, i, j);
            lw[k] = acc;
          }
          const std::vector<double> probs = posterior_from_log_weights(lw);
          Rng stream = rng.substream(kPhaseRows, static_cast<std::uint64_t>(ell) * n + i);
          labels[i] = stream.categorical(probs);
        },
        kDrawGrain);
  }
}

void draw_rows_shared(const DensityTensor& tensor, PartitionPair& partition,
                      const ModelState& state, const GibbsRng& rng, std::size_t n,
                      std::size_t p) {
  const CoClusterStructure& structure = state.structure;
  const int K = structure.K[0];
  std::vector<int> drawn(n);
  if (K == 1) {
    std::fill(drawn.begin(), drawn.end(), 0);
  } else {
    parallel_for(
        n,
        [&](std::size_t i) {
          std::vector<double> lw(K);
          for (int k = 0; k < K; ++k) {
            double acc = std::log(state.pi[0][k]);
            for (std::size_t j = 0; j < p; ++j)
              acc += tensor.at(partition.col_labels[j], k, i, j);
            lw[k] = acc;
          }
          const std::vector<double> probs = posterior_from_log_weights(lw);
          Rng stream = rng.substream(kPhaseRows, i);
          drawn[i] = stream.categorical(probs);
        },
        kDrawGrain);
  }
  for (int ell = 0; ell < structure.L; ++ell) partition.row_labels[ell] = drawn;
}

}  // namespace

void se_step_rows(const DensityTensor& tensor, PartitionPair& partition,
                  const ModelState& state, const GibbsRng& rng, RowCoupling coupling) {
  const std::size_t n = partition.row_labels.front().size();
  const std::size_t p = partition.col_labels.size();
  if (coupling == RowCoupling::shared)
    draw_rows_shared(tensor, partition, state, rng, n, p);
  else
    draw_rows_independent(tensor, partition, state, rng, n, p);
}

void se_step_rows(const CoefficientGrid& grid, PartitionPair& partition,
                  const ModelState& state, const GibbsRng& rng, RowCoupling coupling) {
  const DensityTensor tensor(grid, state);
  se_step_rows(tensor, partition, state, rng, coupling);
}

void se_step_columns(const DensityTensor& tensor, PartitionPair& partition,
                     const ModelState& state, const GibbsRng& rng) {
  const CoClusterStructure& structure = state.structure;
  const std::size_t n = partition.row_labels.front().size();
  const std::size_t p = partition.col_labels.size();
  if (structure.L == 1) {
    std::fill(partition.col_labels.begin(), partition.col_labels.end(), 0);
    return;
  }
  parallel_for(
      p,
      [&](std::size_t j) {
        std::vector<double> lw(structure.L);
        for (int ell = 0; ell < structure.L; ++ell) {
          double acc = std::log(state.rho[ell]);
          for (std::size_t i = 0; i < n; ++i)
            acc += tensor.at(ell, partition.row_labels[ell][i], i, j);
          lw[ell] = acc;
        }
        const std::vector<double> probs = posterior_from_log_weights(lw);
        Rng stream = rng.substream(kPhaseCols, j);
        partition.col_labels[j] = stream.categorical(probs);
      },
      kDrawGrain);
}

void se_step_columns(const CoefficientGrid& grid, PartitionPair& partition,
                     const ModelState& state, const GibbsRng& rng) {
  const DensityTensor tensor(grid, state);
  se_step_columns(tensor, partition, state, rng);
}

namespace {

double tensor_log_likelihood(const DensityTensor& tensor, const PartitionPair& partition,
                             const ModelState& state, std::size_t n, std::size_t p,
                             RowCoupling coupling) {
  double acc = 0.0;
  for (std::size_t j = 0; j < p; ++j) acc += std::log(state.rho[partition.col_labels[j]]);
  if (coupling == RowCoupling::shared) {
    for (std::size_t i = 0; i < n; ++i)
      acc += std::log(state.pi[0][partition.row_labels[0][i]]);
  } else {
    for (int ell = 0; ell < state.structure.L; ++ell)
      for (std::size_t i = 0; i < n; ++i)
        acc += std::log(state.pi[ell][partition.row_labels[ell][i]]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const int ell = partition.col_labels[j];
      acc += tensor.at(ell, partition.row_labels[ell][i], i, j);
    }
  }
  return acc;
}

double window_mean(const std::vector<double>& trace, std::size_t end, int window) {
  const std::size_t w = std::min<std::size_t>(window, end);
  double acc = 0.0;
  for (std::size_t q = end - w; q < end; ++q) acc += trace[q];
  return acc / static_cast<double>(w);
}

}  // namespace

SemGibbsResult run_sem_gibbs(const CoefficientGrid& grid,
                             const PartitionPair& initial_partition,
                             const CoClusterStructure& structure,
                             const SemGibbsConfig& config, RowCoupling coupling) {
  config.validate();
  validate_partition(initial_partition, grid.n, grid.p, structure);
  if (coupling == RowCoupling::shared)
    for (int k : structure.K)
      if (k != structure.K[0])
        throw InvalidInputError("shared coupling requires a uniform K");

  PartitionPair partition = initial_partition;
  SemGibbsResult result;
  std::map<int, int> consecutive_repairs;

  bool have_best = false;
  ModelState last_state;
  PartitionPair last_partition;
  double last_ll = 0.0;

  for (int q = 0; q < config.max_iterations; ++q) {
    Rng repair_rng(derive_seed(config.seed, static_cast<std::uint64_t>(q), kPhaseRepair, 0));
    const std::vector<int> repaired =
        repair_partition(grid.n, grid.p, structure, partition, repair_rng);
    result.degeneracy_events += static_cast<int>(repaired.size());
    for (auto& [key, count] : consecutive_repairs)
      if (std::find(repaired.begin(), repaired.end(), key) == repaired.end()) count = 0;
    for (int key : repaired) {
      if (++consecutive_repairs[key] > 20)
        throw DegenerateStructureError(
            "structure repeatedly produces empty clusters; it is too large for the data");
    }
    if (coupling == RowCoupling::shared && !repaired.empty())
      for (int ell = 1; ell < structure.L; ++ell)
        partition.row_labels[ell] = partition.row_labels[0];

    const ModelState state = m_step(grid, partition, structure, config);
    const DensityTensor tensor(grid, state);
    const double ll =
        tensor_log_likelihood(tensor, partition, state, grid.n, grid.p, coupling);
    result.likelihood_trace.push_back(ll);

    last_state = state;
    last_partition = partition;
    last_ll = ll;
    if (q >= config.burn_in && (!have_best || ll > result.best_log_likelihood)) {
      result.best_state = state;
      result.best_partition = partition;
      result.best_log_likelihood = ll;
      have_best = true;
    }

    const GibbsRng gibbs{config.seed, static_cast<std::uint64_t>(q)};
    se_step_rows(tensor, partition, state, gibbs, coupling);
    se_step_columns(tensor, partition, state, gibbs);

    const std::size_t len = result.likelihood_trace.size();
    if (len >= 2) {
      const double now = window_mean(result.likelihood_trace, len, config.convergence_window);
      const double prev =
          window_mean(result.likelihood_trace, len - 1, config.convergence_window);
      const double scale = std::max(1.0, std::abs(prev));
      if (std::abs(now - prev) <= config.convergence_tol * scale) {
        result.converged = true;
        break;
      }
    }
  }

  result.iterations_run = static_cast<int>(result.likelihood_trace.size());
  if (!have_best) {
    // Run ended before burn-in: fall back to the final snapshot.
    result.best_state = std::move(last_state);
    result.best_partition = std::move(last_partition);
    result.best_log_likelihood = last_ll;
  }
  return result;
}

namespace {

SemGibbsResult best_of_runs(const CoefficientGrid& grid, const CoClusterStructure& structure,
                            const SemGibbsConfig& config, int n_runs, RowCoupling coupling,
                            const std::function<PartitionPair(std::uint64_t)>& make_initial) {
  if (n_runs < 1) throw InvalidInputError("run_concurrent: n_runs must be >= 1");
  std::vector<std::optional<SemGibbsResult>> results(n_runs);
  std::vector<std::string> failures(n_runs);
  parallel_for(n_runs, [&](std::size_t r) {
    SemGibbsConfig run_config = config;
    run_config.seed = config.seed + r;
    try {
      const PartitionPair initial = make_initial(run_config.seed);
      results[r] = run_sem_gibbs(grid, initial, structure, run_config, coupling);
    } catch (const DegenerateStructureError& e) {
      failures[r] = e.what();
    }
  });
  int best = -1;
  for (int r = 0; r < n_runs; ++r) {
    if (!results[r]) continue;
    if (best < 0 || results[r]->best_log_likelihood > results[best]->best_log_likelihood)
      best = r;
  }
  if (best < 0)
    throw DegenerateStructureError("all concurrent runs degenerate: " + failures[0]);
  return std::move(*results[best]);
}

}  // namespace

SemGibbsResult run_concurrent(const CoefficientGrid& grid, const CoClusterStructure& structure,
                              const SemGibbsConfig& config, int n_runs,
                              const Initializer& initializer, RowCoupling coupling) {
  return best_of_runs(grid, structure, config, n_runs, coupling,
                      [&](std::uint64_t seed) { return initializer(grid, structure, seed); });
}

SemGibbsResult run_concurrent(const CoefficientGrid& grid, const CoClusterStructure& structure,
                              const SemGibbsConfig& config, int n_runs,
                              const PartitionPair& initial_partition, RowCoupling coupling) {
  return best_of_runs(grid, structure, config, n_runs, coupling,
                      [&](std::uint64_t) { return initial_partition; });
}

}  // namespace funclbm
