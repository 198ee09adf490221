#include "funclbm/initialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "funclbm/kernels.hpp"
#include "funclbm/model_selection.hpp"

namespace funclbm {

namespace {

void require_fits(std::size_t n, std::size_t p, const CoClusterStructure& structure) {
  validate_structure(structure);
  const int max_k = *std::max_element(structure.K.begin(), structure.K.end());
  if (p < static_cast<std::size_t>(structure.L) || n < static_cast<std::size_t>(max_k))
    throw DegenerateStructureError("structure is larger than the data");
}

// Rotates random items (from clusters keeping >= 2 members) into every empty
// cluster. Donor choice is uniform over eligible items, so cluster symmetry
// is preserved.
void fill_empty(std::vector<int>& labels, int clusters, Rng& rng) {
  std::vector<int> counts(clusters, 0);
  for (int l : labels) ++counts[l];
  for (int c = 0; c < clusters; ++c) {
    while (counts[c] == 0) {
      std::vector<std::size_t> donors;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (counts[labels[i]] >= 2) donors.push_back(i);
      if (donors.empty())
        throw DegenerateStructureError("cannot populate every cluster");
      const std::size_t pick = donors[rng.uniform_int(donors.size())];
      --counts[labels[pick]];
      labels[pick] = c;
      ++counts[c];
    }
  }
}

std::vector<int> uniform_labels(std::size_t count, int clusters, Rng& rng) {
  std::vector<int> labels(count);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_int(clusters));
  return labels;
}

// Per-column mean coefficient vector, p x m row-major.
std::vector<double> column_features(const CoefficientGrid& grid) {
  std::vector<double> features(grid.p * grid.m, 0.0);
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.p; ++j) {
      const auto cell = grid.cell(i, j);
      double* f = features.data() + j * grid.m;
      for (std::size_t t = 0; t < grid.m; ++t) f[t] += cell[t];
    }
  for (double& v : features) v /= static_cast<double>(grid.n);
  return features;
}

// Per-row mean coefficient vector over the columns of one cluster.
std::vector<double> row_features(const CoefficientGrid& grid,
                                 const std::vector<int>& col_labels, int ell) {
  std::vector<double> features(grid.n * grid.m, 0.0);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < grid.p; ++j)
    if (col_labels[j] == ell) ++cols;
  for (std::size_t i = 0; i < grid.n; ++i) {
    double* f = features.data() + i * grid.m;
    for (std::size_t j = 0; j < grid.p; ++j) {
      if (col_labels[j] != ell) continue;
      const auto cell = grid.cell(i, j);
      for (std::size_t t = 0; t < grid.m; ++t) f[t] += cell[t];
    }
    if (cols > 0)
      for (std::size_t t = 0; t < grid.m; ++t) f[t] /= static_cast<double>(cols);
  }
  return features;
}

// Seeds clusters with per_cluster random items and assigns the rest by
// nearest seed-mean distance.
std::vector<int> seeded_assignment(const std::vector<double>& features,
                                   std::size_t count, std::size_t dim, int clusters,
                                   int per_cluster, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<int> labels(count, -1);
  std::vector<double> means(clusters * dim, 0.0);
  std::vector<int> sizes(clusters, 0);
  std::size_t next = 0;
  for (int c = 0; c < clusters; ++c) {
    for (int s = 0; s < per_cluster && next < count; ++s) {
      const std::size_t item = order[next++];
      labels[item] = c;
      const double* f = features.data() + item * dim;
      for (std::size_t t = 0; t < dim; ++t) means[c * dim + t] += f[t];
      ++sizes[c];
    }
  }
  for (int c = 0; c < clusters; ++c)
    if (sizes[c] > 0)
      for (std::size_t t = 0; t < dim; ++t) means[c * dim + t] /= sizes[c];

  for (std::size_t i = 0; i < count; ++i) {
    if (labels[i] >= 0) continue;
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters; ++c) {
      const double dist = kernels::squared_distance(features.data() + i * dim,
                                                    means.data() + c * dim, dim);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    labels[i] = best;
  }
  return labels;
}

int seeds_per_cluster(std::size_t count, int clusters) {
  const int by_rule =
      std::max(2, static_cast<int>((count + 5 * clusters - 1) / (5 * clusters)));
  return std::max(1, std::min<int>(by_rule, static_cast<int>(count) / clusters));
}

}  // namespace

InitStrategy::Kind init_kind_from_name(const std::string& name) {
  if (name == "random") return InitStrategy::Kind::random_partition;
  if (name == "sample") return InitStrategy::Kind::sample_blocks;
  if (name == "kmeans") return InitStrategy::Kind::kmeans;
  if (name == "funlbm") return InitStrategy::Kind::funlbm_seed;
  throw InvalidInputError("unknown init strategy: " + name);
}

std::string init_kind_name(InitStrategy::Kind kind) {
  switch (kind) {
    case InitStrategy::Kind::random_partition:
      return "random";
    case InitStrategy::Kind::sample_blocks:
      return "sample";
    case InitStrategy::Kind::kmeans:
      return "kmeans";
    case InitStrategy::Kind::funlbm_seed:
      return "funlbm";
  }
  return "?";
}

PartitionPair init_random(std::size_t n, std::size_t p,
                          const CoClusterStructure& structure, Rng& rng) {
  require_fits(n, p, structure);
  PartitionPair part;
  part.col_labels = uniform_labels(p, structure.L, rng);
  fill_empty(part.col_labels, structure.L, rng);
  part.row_labels.resize(structure.L);
  for (int ell = 0; ell < structure.L; ++ell) {
    part.row_labels[ell] = uniform_labels(n, structure.K[ell], rng);
    fill_empty(part.row_labels[ell], structure.K[ell], rng);
  }
  return part;
}

PartitionPair init_sample_blocks(const CoefficientGrid& grid,
                                 const CoClusterStructure& structure, Rng& rng) {
  require_fits(grid.n, grid.p, structure);
  PartitionPair part;

  const std::vector<double> col_feats = column_features(grid);
  part.col_labels = seeded_assignment(col_feats, grid.p, grid.m, structure.L,
                                      seeds_per_cluster(grid.p, structure.L), rng);
  fill_empty(part.col_labels, structure.L, rng);

  part.row_labels.resize(structure.L);
  for (int ell = 0; ell < structure.L; ++ell) {
    const std::vector<double> feats = row_features(grid, part.col_labels, ell);
    part.row_labels[ell] =
        seeded_assignment(feats, grid.n, grid.m, structure.K[ell],
                          seeds_per_cluster(grid.n, structure.K[ell]), rng);
    fill_empty(part.row_labels[ell], structure.K[ell], rng);
  }
  return part;
}

KMeansResult kmeans(const std::vector<double>& points, std::size_t count,
                    std::size_t dim, int k, int iters, int restarts, Rng& rng) {
  if (count == 0 || k < 1 || points.size() != count * dim)
    throw InvalidInputError("kmeans: bad arguments");
  if (static_cast<std::size_t>(k) > count)
    throw InvalidInputError("kmeans: more clusters than points");

  const auto point = [&](std::size_t i) { return points.data() + i * dim; };
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt < std::max(1, restarts); ++attempt) {
    // k-means++ seeding
    std::vector<double> centroids(k * dim);
    std::vector<double> d2(count, std::numeric_limits<double>::infinity());
    std::size_t first = rng.uniform_int(count);
    std::copy_n(point(first), dim, centroids.begin());
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const double dist =
            kernels::squared_distance(point(i), centroids.data() + (c - 1) * dim, dim);
        d2[i] = std::min(d2[i], dist);
        total += d2[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
          cum += d2[i];
          if (cum >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.uniform_int(count);
      }
      std::copy_n(point(pick), dim, centroids.begin() + c * dim);
    }

    std::vector<int> labels(count, 0);
    std::vector<double> dist_to_centroid(count, 0.0);
    double inertia = 0.0;
    for (int it = 0; it < iters; ++it) {
      inertia = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        int arg = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double dist =
              kernels::squared_distance(point(i), centroids.data() + c * dim, dim);
          if (dist < bestd) {
            bestd = dist;
            arg = c;
          }
        }
        labels[i] = arg;
        dist_to_centroid[i] = bestd;
        inertia += bestd;
      }

      std::vector<int> sizes(k, 0);
      std::fill(centroids.begin(), centroids.end(), 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        ++sizes[labels[i]];
        const double* f = point(i);
        double* c = centroids.data() + labels[i] * dim;
        for (std::size_t t = 0; t < dim; ++t) c[t] += f[t];
      }
      for (int c = 0; c < k; ++c) {
        if (sizes[c] > 0) {
          for (std::size_t t = 0; t < dim; ++t) centroids[c * dim + t] /= sizes[c];
        } else {
          // reseed to the currently worst-fit point
          std::size_t far = 0;
          for (std::size_t i = 1; i < count; ++i)
            if (dist_to_centroid[i] > dist_to_centroid[far]) far = i;
          std::copy_n(point(far), dim, centroids.begin() + c * dim);
          dist_to_centroid[far] = 0.0;
        }
      }
    }

    // final assignment for the updated centroids
    inertia = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      int arg = 0;
      double bestd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist =
            kernels::squared_distance(point(i), centroids.data() + c * dim, dim);
        if (dist < bestd) {
          bestd = dist;
          arg = c;
        }
      }
      labels[i] = arg;
      inertia += bestd;
    }

    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centroids = std::move(centroids);
      best.inertia = inertia;
    }
  }
  return best;
}

PartitionPair init_kmeans(const CoefficientGrid& grid,
                          const CoClusterStructure& structure,
                          const InitStrategy& strategy, Rng& rng) {
  require_fits(grid.n, grid.p, structure);
  PartitionPair part;

  const std::vector<double> col_feats = column_features(grid);
  part.col_labels = kmeans(col_feats, grid.p, grid.m, structure.L,
                           strategy.kmeans_iters, strategy.kmeans_restarts, rng)
                        .labels;
  fill_empty(part.col_labels, structure.L, rng);

  part.row_labels.resize(structure.L);
  for (int ell = 0; ell < structure.L; ++ell) {
    // Row vectors restricted to this cluster's columns, concatenated.
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < grid.p; ++j)
      if (part.col_labels[j] == ell) cols.push_back(j);
    const std::size_t dim = cols.size() * grid.m;
    std::vector<double> feats(grid.n * dim);
    for (std::size_t i = 0; i < grid.n; ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto cell = grid.cell(i, cols[c]);
        std::copy(cell.begin(), cell.end(), feats.begin() + i * dim + c * grid.m);
      }
    part.row_labels[ell] = kmeans(feats, grid.n, dim, structure.K[ell],
                                  strategy.kmeans_iters, strategy.kmeans_restarts, rng)
                               .labels;
    fill_empty(part.row_labels[ell], structure.K[ell], rng);
  }
  return part;
}

PartitionPair init_funlbm(const CoefficientGrid& grid,
                          const CoClusterStructure& structure,
                          const SemGibbsConfig& config, Rng& rng) {
  require_fits(grid.n, grid.p, structure);
  const int shared_k = *std::max_element(structure.K.begin(), structure.K.end());

  SemGibbsConfig fit_config = config;
  fit_config.seed = rng.next_u64();
  const SemGibbsResult fit = funlbm_fit(grid, shared_k, structure.L, fit_config);

  PartitionPair part;
  part.col_labels = fit.best_partition.col_labels;
  fill_empty(part.col_labels, structure.L, rng);
  const std::vector<int>& shared = fit.best_partition.row_labels[0];

  part.row_labels.resize(structure.L);
  for (int ell = 0; ell < structure.L; ++ell) {
    const int K = structure.K[ell];
    std::vector<int> labels = shared;
    if (K < shared_k) {
      // Retained clusters are 0..K-1; centroids over this cluster's columns.
      const std::vector<double> feats = row_features(grid, part.col_labels, ell);
      std::vector<double> means(K * grid.m, 0.0);
      std::vector<int> sizes(K, 0);
      for (std::size_t i = 0; i < grid.n; ++i) {
        if (labels[i] >= K) continue;
        ++sizes[labels[i]];
        for (std::size_t t = 0; t < grid.m; ++t)
          means[labels[i] * grid.m + t] += feats[i * grid.m + t];
      }
      for (int c = 0; c < K; ++c)
        if (sizes[c] > 0)
          for (std::size_t t = 0; t < grid.m; ++t) means[c * grid.m + t] /= sizes[c];
      for (std::size_t i = 0; i < grid.n; ++i) {
        if (labels[i] < K) continue;
        int bestc = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < K; ++c) {
          if (sizes[c] == 0) continue;
          const double dist = kernels::squared_distance(
              feats.data() + i * grid.m, means.data() + c * grid.m, grid.m);
          if (dist < bestd) {
            bestd = dist;
            bestc = c;
          }
        }
        labels[i] = bestc;
      }
    }
    fill_empty(labels, K, rng);
    part.row_labels[ell] = std::move(labels);
  }
  return part;
}

Initializer make_initializer(const InitStrategy& strategy, const SemGibbsConfig& config) {
  return [strategy, config](const CoefficientGrid& grid,
                            const CoClusterStructure& structure,
                            std::uint64_t seed) -> PartitionPair {
    Rng rng(derive_seed(seed, 0x1217));
    switch (strategy.kind) {
      case InitStrategy::Kind::random_partition:
        return init_random(grid.n, grid.p, structure, rng);
      case InitStrategy::Kind::sample_blocks:
        return init_sample_blocks(grid, structure, rng);
      case InitStrategy::Kind::kmeans:
        return init_kmeans(grid, structure, strategy, rng);
      case InitStrategy::Kind::funlbm_seed:
        return init_funlbm(grid, structure, config, rng);
    }
    throw InvalidInputError("unknown init strategy");
  };
}

}  // namespace funclbm
