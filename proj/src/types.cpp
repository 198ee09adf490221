#include "funclbm/types.hpp"

namespace funclbm {

void validate_structure(const CoClusterStructure& s) {
  if (s.L < 1) throw InvalidInputError("structure: L must be >= 1");
  if (static_cast<int>(s.K.size()) != s.L)
    throw InvalidInputError("structure: K must have exactly L entries");
  for (int k : s.K)
    if (k < 1) throw InvalidInputError("structure: every K_l must be >= 1");
}

void validate_partition(const PartitionPair& part, std::size_t n, std::size_t p,
                        const CoClusterStructure& s) {
  validate_structure(s);
  if (part.col_labels.size() != p)
    throw InvalidInputError("partition: col_labels size mismatch");
  if (part.row_labels.size() != static_cast<std::size_t>(s.L))
    throw InvalidInputError("partition: row_labels must have L entries");
  for (int w : part.col_labels)
    if (w < 0 || w >= s.L) throw InvalidInputError("partition: column label out of range");
  for (int ell = 0; ell < s.L; ++ell) {
    if (part.row_labels[ell].size() != n)
      throw InvalidInputError("partition: row label vector size mismatch");
    for (int z : part.row_labels[ell])
      if (z < 0 || z >= s.K[ell])
        throw InvalidInputError("partition: row label out of range");
  }
}

}  // namespace funclbm
