#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "specmap/matrix.hpp"

namespace specmap::kernels {

// Undirected weighted adjacency, one neighbor list per node.
using AdjacencyList = std::vector<std::vector<std::pair<std::uint32_t, double>>>;

// Hot inner loops of the pipeline, parallelized with OpenMP. Each output slot
// (a matrix row or element) is computed by exactly one thread in a fixed
// serial order, so results are bit-identical for any thread count. The
// serial:: lane below implements the same contracts with plain loops and,
// where it matters, a different algorithm; tests compare the two.

// N x N Euclidean distance matrix (zero diagonal).
Matrix pairwise_distances(const Matrix& x);

// Gram matrix of the polynomial kernel (x_i . x_j + coef0)^degree.
Matrix poly_kernel_matrix(const Matrix& x, int degree, double coef0);

// Per-instance totals over contiguous column spans [begin, end).
Matrix region_totals(const Matrix& x, const std::vector<std::pair<std::size_t, std::size_t>>& spans);

// Nearest centroid per point; returns squared distances alongside.
void assign_clusters(const Matrix& points, const Matrix& centroids,
                     std::vector<int>& assignment, std::vector<double>& dist2);

// All-pairs shortest paths over the adjacency (heap Dijkstra per source).
// Unreachable pairs get +infinity.
Matrix geodesic_all_pairs(const AdjacencyList& adj);

namespace serial {

Matrix pairwise_distances(const Matrix& x);
Matrix poly_kernel_matrix(const Matrix& x, int degree, double coef0);
Matrix region_totals(const Matrix& x, const std::vector<std::pair<std::size_t, std::size_t>>& spans);
void assign_clusters(const Matrix& points, const Matrix& centroids,
                     std::vector<int>& assignment, std::vector<double>& dist2);
// Linear-scan Dijkstra, O(N^2) per source; the reference shortest-path oracle.
Matrix geodesic_all_pairs(const AdjacencyList& adj);

} // namespace serial

} // namespace specmap::kernels
