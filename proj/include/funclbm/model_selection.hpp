#pragma once

// ICL scoring and the two structure-search strategies. Both estimate the
// column-cluster count with FunLBM fits (grid search over (K, L) or a
// greedy walk), then assemble a FunCLBM structure and refit it.

#include <cstdint>
#include <vector>

#include "funclbm/inference.hpp"
#include "funclbm/initialization.hpp"
#include "funclbm/types.hpp"

namespace funclbm {

struct SelectionConfig {
  int L_max = 5;
  int K_max = 5;
  int runs_per_candidate = 10;
  enum class Strategy { grid, greedy };
  Strategy strategy = Strategy::grid;
  SemGibbsConfig sem;
  InitStrategy init;

  void validate() const;
};

struct IclEntry {
  CoClusterStructure structure;
  double icl = 0.0;
  double loglik = 0.0;
  bool converged = false;
};

struct SelectionResult {
  CoClusterStructure best_structure;
  SemGibbsResult best_result;
  std::vector<IclEntry> icl_table;     // FunCLBM-form scores
  std::vector<IclEntry> funlbm_table;  // FunLBM-form scores from the L search
  int candidates_evaluated = 0;
};

// ICL(K, L) = loglik - (L-1)/2 log p - 1/2 sum_l (K_l - 1) log n
//           - (sum nu) / 2 log(np)
double icl_score(double loglik, const CoClusterStructure& structure, std::size_t n,
                 std::size_t p,
                 const std::vector<std::vector<long long>>& block_param_counts);
double icl_score(double loglik, const ModelState& state, std::size_t n, std::size_t p);

// FunLBM form with a single shared K:
// loglik - (L-1)/2 log p - (K-1)/2 log n - (sum nu)/2 log(np)
double icl_score_funlbm(double loglik, int K, int L, std::size_t n, std::size_t p,
                        long long total_param_count);

// Number of distinct (L, K multiset) structures with L <= L_max and every
// K_l <= K_max: sum_{l=1}^{L_max} C(K_max + l - 1, l).
unsigned long long count_structures(int L_max, int K_max);

// FunLBM special case: one shared row partition across all column clusters.
// Block machinery and update order are those of the FunCLBM engine.
SemGibbsResult funlbm_fit(const CoefficientGrid& grid, int K, int L,
                          const SemGibbsConfig& config);

SelectionResult select_grid(const CoefficientGrid& grid, const SelectionConfig& config);
SelectionResult select_greedy(const CoefficientGrid& grid, const SelectionConfig& config);
SelectionResult select_structure(const CoefficientGrid& grid, const SelectionConfig& config);

}  // namespace funclbm
