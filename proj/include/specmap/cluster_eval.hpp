#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specmap/linear_embed.hpp"
#include "specmap/matrix.hpp"

namespace specmap {

struct ClusterReport {
    int n_clusters = 0;
    std::vector<int> assignments;
    Matrix centroids;
    std::vector<double> within_scatter; // mean member distance to own centroid
    double dbi = 0.0;
    double objective = 0.0; // sum of squared distances to assigned centroid
    int iterations = 0;
    int best_restart = 0;
    std::uint64_t seed = 0;
};

// Lloyd's algorithm with k-means++ seeding. Runs `restarts` independent
// inits and keeps the lowest objective (ties toward the earlier restart).
// Asking for more clusters than distinct locations converges with coincident
// centroids and throws, because the report's Davies-Bouldin is undefined.
ClusterReport kmeans(const Matrix& points, int n_clusters, std::uint64_t seed, int restarts = 10,
                     int max_iterations = 300);

double davies_bouldin(const Matrix& points, const std::vector<int>& assignments,
                      const Matrix& centroids);

struct DbiCell {
    std::string method;
    int k = 0; // neighborhood size of the source embedding, -1 for linear methods
    int d = 0;
    int n_clusters = 0;
    bool ok = false;
    std::string error;
    double dbi = 0.0;
    double objective = 0.0;
    std::vector<int> assignments;
};

std::vector<DbiCell> dbi_sweep(const std::vector<LabeledEmbedding>& embeddings,
                               const std::vector<int>& cluster_counts, std::uint64_t seed,
                               int restarts = 10);

} // namespace specmap
