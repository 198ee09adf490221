#pragma once

// Initial partitions for SEM-Gibbs: random labels, seeded blocks with
// nearest-centroid completion, two-stage k-means, or a FunLBM pre-fit.
// Every initializer returns a partition with no empty cluster.

#include <cstdint>
#include <vector>

#include "funclbm/inference.hpp"
#include "funclbm/rng.hpp"
#include "funclbm/types.hpp"

namespace funclbm {

struct InitStrategy {
  enum class Kind { random_partition, sample_blocks, kmeans, funlbm_seed };
  Kind kind = Kind::random_partition;
  int kmeans_iters = 20;
  int kmeans_restarts = 5;
};

InitStrategy::Kind init_kind_from_name(const std::string& name);
std::string init_kind_name(InitStrategy::Kind kind);

// Uniform labels, then empty clusters are refilled by rotating random items
// out of clusters that keep at least 2 members.
PartitionPair init_random(std::size_t n, std::size_t p,
                          const CoClusterStructure& structure, Rng& rng);

// Seeds each cluster with a small random subset (max(2, ceil(n / (5 K_l)))
// rows, analogous for columns), then assigns the rest to the nearest seeded
// cluster mean in coefficient space.
PartitionPair init_sample_blocks(const CoefficientGrid& grid,
                                 const CoClusterStructure& structure, Rng& rng);

// Columns clustered by k-means on their per-column mean coefficient vector;
// then one k-means per column cluster on the concatenated cluster cells.
PartitionPair init_kmeans(const CoefficientGrid& grid,
                          const CoClusterStructure& structure,
                          const InitStrategy& strategy, Rng& rng);

// FunLBM pre-fit with K = max K_l; its column partition is kept and its
// shared row partition is copied to every column cluster, reassigning labels
// >= K_l to the nearest retained cluster.
PartitionPair init_funlbm(const CoefficientGrid& grid,
                          const CoClusterStructure& structure,
                          const SemGibbsConfig& config, Rng& rng);

Initializer make_initializer(const InitStrategy& strategy, const SemGibbsConfig& config);

// Lloyd's algorithm with k-means++ seeding and restarts; empty clusters are
// reseeded to the farthest point. points is count x dim row-major.
struct KMeansResult {
  std::vector<int> labels;
  std::vector<double> centroids;  // k x dim row-major
  double inertia = 0.0;
};

KMeansResult kmeans(const std::vector<double>& points, std::size_t count,
                    std::size_t dim, int k, int iters, int restarts, Rng& rng);

}  // namespace funclbm
