#include "funclbm/evaluation.hpp"

#include <algorithm>
#include <cstddef>

namespace funclbm {

namespace {

// Remaps arbitrary nonnegative labels to dense 0..R-1 and returns counts.
std::vector<long long> compact(const LabelVector& labels, LabelVector& dense) {
  LabelVector order(labels);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  dense.resize(labels.size());
  std::vector<long long> counts(order.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(order.begin(), order.end(), labels[i]);
    dense[i] = static_cast<int>(it - order.begin());
    ++counts[dense[i]];
  }
  return counts;
}

double comb2(long long n) {
  return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

}  // namespace

double ari(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw InvalidInputError("ari: label vectors differ in length");
  if (a.size() < 2) throw InvalidInputError("ari: need at least 2 items");
  for (int v : a)
    if (v < 0) throw InvalidInputError("ari: labels must be nonnegative");
  for (int v : b)
    if (v < 0) throw InvalidInputError("ari: labels must be nonnegative");

  LabelVector da, db;
  const std::vector<long long> ca = compact(a, da);
  const std::vector<long long> cb = compact(b, db);
  const std::size_t rows = ca.size();
  const std::size_t cols = cb.size();

  std::vector<long long> table(rows * cols, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++table[da[i] * cols + db[i]];

  double sum_cells = 0.0;
  for (long long c : table) sum_cells += comb2(c);
  double sum_a = 0.0;
  for (long long c : ca) sum_a += comb2(c);
  double sum_b = 0.0;
  for (long long c : cb) sum_b += comb2(c);

  const double expected = sum_a * sum_b / comb2(static_cast<long long>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;  // both-trivial and both-discrete cases
  return (sum_cells - expected) / denom;
}

PartitionViews partition_views(const PartitionPair& est,
                               const CoClusterStructure& est_structure,
                               const PartitionPair& truth,
                               const CoClusterStructure& truth_structure) {
  const std::size_t p = est.col_labels.size();
  if (truth.col_labels.size() != p)
    throw InvalidInputError("partition_views: column dimension mismatch");
  if (est.row_labels.empty() || truth.row_labels.empty())
    throw InvalidInputError("partition_views: empty row partitions");
  const std::size_t n = est.row_labels.front().size();
  if (truth.row_labels.front().size() != n)
    throw InvalidInputError("partition_views: row dimension mismatch");
  validate_partition(est, n, p, est_structure);
  validate_partition(truth, n, p, truth_structure);

  PartitionViews out;
  out.col_ari = ari(est.col_labels, truth.col_labels);

  const int est_maxk = *std::max_element(est_structure.K.begin(), est_structure.K.end());
  const int truth_maxk =
      *std::max_element(truth_structure.K.begin(), truth_structure.K.end());

  LabelVector est_cells(n * p), truth_cells(n * p);
  LabelVector est_rowview(n * p), truth_rowview(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    const int we = est.col_labels[j];
    const int wt = truth.col_labels[j];
    for (std::size_t i = 0; i < n; ++i) {
      const int ze = est.row_labels[we][i];
      const int zt = truth.row_labels[wt][i];
      est_cells[i * p + j] = we * est_maxk + ze;
      truth_cells[i * p + j] = wt * truth_maxk + zt;
      est_rowview[i * p + j] = ze;
      truth_rowview[i * p + j] = zt;
    }
  }
  out.block_ari = ari(est_cells, truth_cells);
  out.row_ari = ari(est_rowview, truth_rowview);
  return out;
}

}  // namespace funclbm
