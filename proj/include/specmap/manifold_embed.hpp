#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specmap/kernels.hpp"
#include "specmap/linear_embed.hpp"
#include "specmap/matrix.hpp"

namespace specmap {

// k-NN graph symmetrized by union (an edge survives if either endpoint chose
// the other), with Euclidean weights and a connected-component census.
struct NeighborhoodGraph {
    std::size_t n_nodes = 0;
    int k = 0;
    kernels::AdjacencyList adjacency; // symmetric; weight = Euclidean distance
    std::vector<int> component_of;
    int component_count = 0;

    std::vector<std::size_t> component_sizes() const;
};

// Directed k-NN by Euclidean distance (ties broken toward the smaller index),
// union-symmetrized.
NeighborhoodGraph knn_graph(const Matrix& x, int k);

// All-pairs shortest paths over the graph. Throws DisconnectedGraphError
// (carrying the component census) when the graph is not connected.
DistanceMatrix geodesic_distances(const NeighborhoodGraph& g);

// cmds on geodesic distances; residual variance is computed against the
// geodesic matrix for dimensions 1..d.
Embedding isomap(const Matrix& x, int k, int d);

// Row-stochastic reconstruction weights over each point's k nearest
// neighbors. Rows sum to exactly 1; the local Gram system is ridge-
// regularized by reg_scale * trace / k.
struct ReconstructionWeights {
    int k = 0;
    double reg_scale = 0.0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;

    Matrix dense(std::size_t n) const;
};

ReconstructionWeights lle_weights(const Matrix& x, int k, double reg_scale = 1e-3);

// Bottom eigenvectors of (I-W)^T (I-W), constant mode dropped, scaled by
// sqrt(N). Warns via the embedding's k/d metadata only; a disconnected graph
// is permitted here.
Embedding lle(const Matrix& x, int k, int d, double reg_scale = 1e-3);

// One row per (k, d). Disconnected ISOMAP cells are marked, never fatal.
struct SweepCell {
    int k = 0;
    int d = 0;
    bool connected = false;
    int component_count = 0;
    bool ok = false;
    std::string error;
    double residual = 0.0; // isomap only; NaN otherwise
    std::vector<double> eigenvalues;
    Embedding embedding;
};

std::vector<SweepCell> neighborhood_sweep(const Matrix& x, EmbedMethod method,
                                          const std::vector<int>& k_values,
                                          const std::vector<int>& d_values,
                                          double lle_reg_scale = 1e-3);

} // namespace specmap
