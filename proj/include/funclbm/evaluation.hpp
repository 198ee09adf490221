#pragma once

// Adjusted Rand Index and the row/column/block comparison views between an
// estimated and a reference PartitionPair. All three views are defined over
// the n*p cell grid so they stay well-defined when the two structures
// disagree on L.

#include <vector>

#include "funclbm/types.hpp"

namespace funclbm {

using LabelVector = std::vector<int>;

// Contingency-table ARI. Symmetric, 1.0 iff the partitions are identical up
// to relabeling. When the chance-corrected denominator vanishes (e.g. both
// partitions trivial) the partitions agree pair-by-pair and 1.0 is returned.
double ari(const LabelVector& a, const LabelVector& b);

struct PartitionViews {
  double row_ari = 0.0;
  double col_ari = 0.0;
  double block_ari = 0.0;
};

// col: ARI over the p column labels.
// block: ARI over n*p cell labels (col cluster of j, row cluster of i in it).
// row: ARI over n*p cell labels keeping only the row-cluster component, each
// side indexing rows through its own column assignment.
PartitionViews partition_views(const PartitionPair& est,
                               const CoClusterStructure& est_structure,
                               const PartitionPair& truth,
                               const CoClusterStructure& truth_structure);

}  // namespace funclbm
