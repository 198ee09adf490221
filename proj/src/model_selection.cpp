#include "funclbm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>

namespace funclbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

PartitionPair shared_random_partition(std::size_t n, std::size_t p,
                                      const CoClusterStructure& structure,
                                      std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1217));
  PartitionPair part = init_random(n, p, structure, rng);
  for (int ell = 1; ell < structure.L; ++ell)
    part.row_labels[ell] = part.row_labels[0];
  return part;
}

CoefficientGrid slice_columns(const CoefficientGrid& grid,
                              const std::vector<std::size_t>& cols) {
  CoefficientGrid out;
  out.n = grid.n;
  out.p = cols.size();
  out.m = grid.m;
  out.grid = grid.grid;
  out.row_ids = grid.row_ids;
  out.col_ids.reserve(cols.size());
  for (std::size_t j : cols) out.col_ids.push_back(grid.col_ids[j]);
  out.coeffs.resize(out.n * out.p * out.m);
  out.degenerate.resize(out.n * out.p);
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto cell = grid.cell(i, cols[c]);
      std::copy(cell.begin(), cell.end(),
                out.coeffs.begin() + (i * out.p + c) * out.m);
      out.degenerate[i * out.p + c] = grid.degenerate[i * grid.p + cols[c]];
    }
  return out;
}

long long total_param_count(const ModelState& state) {
  long long total = 0;
  for (const auto& row : state.blocks)
    for (const BlockParams& block : row) total += block.param_count();
  return total;
}

struct CandidateFit {
  SemGibbsResult result;
  bool ok = false;
  std::string error;
};

CandidateFit fit_candidate(const CoefficientGrid& grid, const CoClusterStructure& structure,
                           const SemGibbsConfig& sem, int n_runs,
                           const Initializer& initializer, RowCoupling coupling) {
  CandidateFit fit;
  try {
    fit.result = run_concurrent(grid, structure, sem, n_runs, initializer, coupling);
    fit.ok = true;
  } catch (const DegenerateStructureError& e) {
    fit.error = e.what();
  }
  return fit;
}

}  // namespace

void SelectionConfig::validate() const {
  if (L_max < 1 || K_max < 1)
    throw InvalidInputError("selection: L_max and K_max must be >= 1");
  if (runs_per_candidate < 1)
    throw InvalidInputError("selection: runs_per_candidate must be >= 1");
  sem.validate();
}

double icl_score(double loglik, const CoClusterStructure& structure, std::size_t n,
                 std::size_t p,
                 const std::vector<std::vector<long long>>& block_param_counts) {
  validate_structure(structure);
  if (block_param_counts.size() != static_cast<std::size_t>(structure.L))
    throw InvalidInputError("icl_score: param counts must cover L clusters");
  double penalty = 0.5 * static_cast<double>(structure.L - 1) * std::log(static_cast<double>(p));
  long long total_nu = 0;
  for (int ell = 0; ell < structure.L; ++ell) {
    if (block_param_counts[ell].size() != static_cast<std::size_t>(structure.K[ell]))
      throw InvalidInputError("icl_score: param counts must cover K_l blocks");
    penalty += 0.5 * static_cast<double>(structure.K[ell] - 1) *
               std::log(static_cast<double>(n));
    for (long long nu : block_param_counts[ell]) total_nu += nu;
  }
  penalty += 0.5 * static_cast<double>(total_nu) * std::log(static_cast<double>(n * p));
  return loglik - penalty;
}

double icl_score(double loglik, const ModelState& state, std::size_t n, std::size_t p) {
  std::vector<std::vector<long long>> counts(state.structure.L);
  for (int ell = 0; ell < state.structure.L; ++ell)
    for (const BlockParams& block : state.blocks[ell])
      counts[ell].push_back(block.param_count());
  return icl_score(loglik, state.structure, n, p, counts);
}

double icl_score_funlbm(double loglik, int K, int L, std::size_t n, std::size_t p,
                        long long total_param_count) {
  return loglik - 0.5 * static_cast<double>(L - 1) * std::log(static_cast<double>(p)) -
         0.5 * static_cast<double>(K - 1) * std::log(static_cast<double>(n)) -
         0.5 * static_cast<double>(total_param_count) *
             std::log(static_cast<double>(n * p));
}

unsigned long long count_structures(int L_max, int K_max) {
  if (L_max < 1 || K_max < 1)
    throw InvalidInputError("count_structures: arguments must be >= 1");
  const auto binomial = [](unsigned long long n, unsigned long long k) {
    if (k > n) return 0ULL;
    unsigned long long r = 1;
    for (unsigned long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  unsigned long long total = 0;
  for (int ell = 1; ell <= L_max; ++ell)
    total += binomial(static_cast<unsigned long long>(K_max) + ell - 1,
                      static_cast<unsigned long long>(ell));
  return total;
}

SemGibbsResult funlbm_fit(const CoefficientGrid& grid, int K, int L,
                          const SemGibbsConfig& config) {
  if (K < 1 || L < 1) throw InvalidInputError("funlbm_fit: K and L must be >= 1");
  const CoClusterStructure structure{L, std::vector<int>(L, K)};
  const PartitionPair initial =
      shared_random_partition(grid.n, grid.p, structure, config.seed);
  return run_sem_gibbs(grid, initial, structure, config, RowCoupling::shared);
}

namespace {

struct FunLbmSearch {
  int best_k = 0;
  int best_l = 0;
  double best_icl = kNegInf;
  SemGibbsResult best_fit;
  std::vector<IclEntry> table;
  int fits = 0;
};

// One FunLBM candidate (K, L) fitted with runs_per_candidate concurrent
// runs; degenerate candidates score -inf (D18-style skip).
void try_funlbm_candidate(const CoefficientGrid& grid, int K, int L,
                          const SelectionConfig& config, std::uint64_t seed,
                          FunLbmSearch& search) {
  SemGibbsConfig sem = config.sem;
  sem.seed = seed;
  const CoClusterStructure structure{L, std::vector<int>(L, K)};
  const Initializer initializer = [&](const CoefficientGrid& g,
                                      const CoClusterStructure& s,
                                      std::uint64_t run_seed) {
    return shared_random_partition(g.n, g.p, s, run_seed);
  };
  const CandidateFit fit =
      fit_candidate(grid, structure, sem, config.runs_per_candidate, initializer,
                    RowCoupling::shared);
  ++search.fits;
  IclEntry entry;
  entry.structure = structure;
  if (fit.ok) {
    entry.loglik = fit.result.best_log_likelihood;
    entry.converged = fit.result.converged;
    entry.icl = icl_score_funlbm(entry.loglik, K, L, grid.n, grid.p,
                                 total_param_count(fit.result.best_state));
  } else {
    std::cerr << "funclbm: skipping degenerate candidate (L=" << L << ", K=" << K
              << "): " << fit.error << "\n";
    entry.loglik = kNegInf;
    entry.icl = kNegInf;
  }
  search.table.push_back(entry);
  if (entry.icl > search.best_icl) {
    search.best_icl = entry.icl;
    search.best_k = K;
    search.best_l = L;
    if (fit.ok) search.best_fit = fit.result;
  }
}

struct ColumnSearch {
  std::vector<int> best_k;                   // per ell
  std::vector<double> best_local;            // per ell, local ICL contribution
  std::vector<std::vector<double>> locals;   // [ell][K-1]
  std::vector<std::vector<int>> row_labels;  // winning sub-partitions
  std::vector<bool> converged;               // per ell winner
  int fits = 0;
};

// Per-cluster row-structure search: each candidate K_l is fitted on the
// cluster's column slice alone. The local score carries exactly the terms of
// the full FunCLBM ICL that depend on this cluster (row memberships, cell
// densities, the (K_l - 1) partition penalty, its blocks' nu penalty), with
// penalties evaluated at the full-grid n and p.
ColumnSearch column_wise_search(const CoefficientGrid& grid,
                                const std::vector<int>& col_labels, int L,
                                const SelectionConfig& config,
                                std::uint64_t seed_base) {
  ColumnSearch search;
  search.best_k.assign(L, 1);
  search.best_local.assign(L, kNegInf);
  search.locals.assign(L, std::vector<double>(config.K_max, kNegInf));
  search.row_labels.assign(L, {});
  search.converged.assign(L, false);
  const double log_np =
      std::log(static_cast<double>(grid.n) * static_cast<double>(grid.p));
  const double log_n = std::log(static_cast<double>(grid.n));

  for (int ell = 0; ell < L; ++ell) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < col_labels.size(); ++j)
      if (col_labels[j] == ell) cols.push_back(j);
    const CoefficientGrid sub = slice_columns(grid, cols);

    for (int k = 1; k <= config.K_max; ++k) {
      SemGibbsConfig sem = config.sem;
      sem.seed = seed_base + static_cast<std::uint64_t>(ell) * config.K_max + (k - 1);
      const CoClusterStructure sub_structure{1, {k}};
      const Initializer initializer = [](const CoefficientGrid& g,
                                         const CoClusterStructure& s,
                                         std::uint64_t run_seed) {
        Rng rng(derive_seed(run_seed, 0x1217));
        return init_random(g.n, g.p, s, rng);
      };
      const CandidateFit fit = fit_candidate(sub, sub_structure, sem,
                                             config.runs_per_candidate, initializer,
                                             RowCoupling::independent);
      ++search.fits;
      if (!fit.ok) {
        std::cerr << "funclbm: skipping degenerate row candidate (cluster " << ell
                  << ", K=" << k << "): " << fit.error << "\n";
        continue;
      }
      // Sub-fit loglik = row membership + cell terms (its log rho term is 0).
      const double local = fit.result.best_log_likelihood -
                           0.5 * static_cast<double>(k - 1) * log_n -
                           0.5 * static_cast<double>(total_param_count(fit.result.best_state)) *
                               log_np;
      search.locals[ell][k - 1] = local;
      if (local > search.best_local[ell]) {
        search.best_local[ell] = local;
        search.best_k[ell] = k;
        search.row_labels[ell] = fit.result.best_partition.row_labels[0];
        search.converged[ell] = fit.result.converged;
      }
    }
    if (search.row_labels[ell].empty())
      throw DegenerateStructureError("column-wise search failed for cluster " +
                                     std::to_string(ell));
  }
  return search;
}

void merge_entry(std::vector<IclEntry>& table, const IclEntry& entry) {
  for (IclEntry& existing : table) {
    if (existing.structure == entry.structure) {
      if (entry.icl > existing.icl) existing = entry;
      return;
    }
  }
  table.push_back(entry);
}

// Shared tail of both strategies: column-wise K search from a FunLBM state,
// assembly, and the final FunCLBM refit from the assembled partition.
SelectionResult finish_from_funlbm(const CoefficientGrid& grid,
                                   const SelectionConfig& config,
                                   const FunLbmSearch& funlbm, bool column_search,
                                   std::uint64_t seed_base) {
  const int L = funlbm.best_l;
  const std::vector<int>& col_labels = funlbm.best_fit.best_partition.col_labels;

  SelectionResult result;
  result.funlbm_table = funlbm.table;
  result.candidates_evaluated = funlbm.fits;

  CoClusterStructure structure{L, std::vector<int>(L, funlbm.best_k)};
  PartitionPair assembled;
  assembled.col_labels = col_labels;
  assembled.row_labels.assign(L, funlbm.best_fit.best_partition.row_labels[0]);

  std::optional<ColumnSearch> columns;
  if (column_search) {
    columns = column_wise_search(grid, col_labels, L, config, seed_base);
    result.candidates_evaluated += columns->fits;
    structure.K = columns->best_k;
    for (int ell = 0; ell < L; ++ell) assembled.row_labels[ell] = columns->row_labels[ell];
  }

  SemGibbsConfig sem = config.sem;
  sem.seed = seed_base + static_cast<std::uint64_t>(L) * config.K_max;
  const Initializer from_assembled = [&assembled](const CoefficientGrid&,
                                                  const CoClusterStructure&,
                                                  std::uint64_t) { return assembled; };
  const CandidateFit final_fit = fit_candidate(grid, structure, sem,
                                               config.runs_per_candidate, from_assembled,
                                               RowCoupling::independent);
  ++result.candidates_evaluated;
  if (!final_fit.ok)
    throw DegenerateStructureError("final FunCLBM refit degenerate: " + final_fit.error);

  if (columns) {
    // Terms shared by every phase-2 candidate: column memberships under the
    // frozen column partition and the L penalty.
    std::vector<int> col_counts(L, 0);
    for (int w : col_labels) ++col_counts[w];
    double shared_terms = -0.5 * static_cast<double>(L - 1) *
                          std::log(static_cast<double>(grid.p));
    for (int ell = 0; ell < L; ++ell)
      shared_terms += col_counts[ell] *
                      std::log(static_cast<double>(col_counts[ell]) /
                               static_cast<double>(grid.p));
    double winners_total = 0.0;
    for (int ell = 0; ell < L; ++ell) winners_total += columns->best_local[ell];

    for (int ell = 0; ell < L; ++ell) {
      for (int k = 1; k <= config.K_max; ++k) {
        if (columns->locals[ell][k - 1] == kNegInf) continue;
        IclEntry entry;
        entry.structure = structure;
        entry.structure.K[ell] = k;
        entry.icl = shared_terms + winners_total - columns->best_local[ell] +
                    columns->locals[ell][k - 1];
        entry.loglik = std::numeric_limits<double>::quiet_NaN();  // assembled estimate
        entry.converged = columns->converged[ell];
        merge_entry(result.icl_table, entry);
      }
    }
  }

  IclEntry final_entry;
  final_entry.structure = structure;
  final_entry.loglik = final_fit.result.best_log_likelihood;
  final_entry.converged = final_fit.result.converged;
  final_entry.icl =
      icl_score(final_entry.loglik, final_fit.result.best_state, grid.n, grid.p);
  merge_entry(result.icl_table, final_entry);

  result.best_structure = structure;
  result.best_result = final_fit.result;
  return result;
}

}  // namespace

SelectionResult select_grid(const CoefficientGrid& grid, const SelectionConfig& config) {
  config.validate();
  FunLbmSearch funlbm;
  for (int L = 1; L <= config.L_max; ++L) {
    for (int K = 1; K <= config.K_max; ++K) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(L - 1) * config.K_max + (K - 1);
      try_funlbm_candidate(grid, K, L, config, config.sem.seed + index, funlbm);
    }
  }
  if (funlbm.best_icl == kNegInf)
    throw DegenerateStructureError("every FunLBM grid candidate degenerated");
  const std::uint64_t seed_base =
      config.sem.seed + static_cast<std::uint64_t>(config.L_max) * config.K_max;
  return finish_from_funlbm(grid, config, funlbm, /*column_search=*/true, seed_base);
}

SelectionResult select_greedy(const CoefficientGrid& grid, const SelectionConfig& config) {
  config.validate();
  FunLbmSearch walk;
  std::uint64_t index = 0;
  try_funlbm_candidate(grid, 1, 1, config, config.sem.seed + index++, walk);
  if (walk.best_icl == kNegInf)
    throw DegenerateStructureError("FunLBM fit at (1,1) degenerated");

  while (true) {
    const int K = walk.best_k;
    const int L = walk.best_l;
    const double current = walk.best_icl;
    if (K < config.K_max)
      try_funlbm_candidate(grid, K + 1, L, config, config.sem.seed + index++, walk);
    if (L < config.L_max)
      try_funlbm_candidate(grid, K, L + 1, config, config.sem.seed + index++, walk);
    if (walk.best_icl <= current) break;  // neither candidate improved
    if (walk.best_k == config.K_max && walk.best_l == config.L_max) break;
  }

  // The greedy walk only proposes uniform-K FunLBM structures; its winner
  // seeds the final FunCLBM refit directly.
  const std::uint64_t seed_base = config.sem.seed + 1000 * kGolden64;
  return finish_from_funlbm(grid, config, walk, /*column_search=*/false, seed_base);
}

SelectionResult select_structure(const CoefficientGrid& grid, const SelectionConfig& config) {
  return config.strategy == SelectionConfig::Strategy::grid ? select_grid(grid, config)
                                                            : select_greedy(grid, config);
}

}  // namespace funclbm
