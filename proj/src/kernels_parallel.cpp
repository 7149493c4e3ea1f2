#include "specmap/kernels.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace specmap::kernels {

namespace {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
}

inline double ipow(double base, int e) {
    double r = 1.0;
    for (int t = 0; t < e; ++t) r *= base;
    return r;
}

} // namespace

Matrix pairwise_distances(const Matrix& x) {
    const std::size_t n = x.rows();
    Matrix d(n, n, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            d(i, j) = std::sqrt(sq_dist(x.row(i), x.row(j)));
    }
    // mirror the upper triangle; exact symmetry by construction
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d(j, i) = d(i, j);
    return d;
}

Matrix poly_kernel_matrix(const Matrix& x, int degree, double coef0) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        for (std::size_t j = i; j < n; ++j)
            k(i, j) = ipow(dot(x.row(i), x.row(j)) + coef0, degree);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            k(j, i) = k(i, j);
    return k;
}

Matrix region_totals(const Matrix& x, const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
    const std::size_t n = x.rows();
    const std::size_t r = spans.size();
    Matrix totals(n, r);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        auto row = x.row(i);
        for (std::size_t s = 0; s < r; ++s) {
            double sum = 0.0;
            for (std::size_t j = spans[s].first; j < spans[s].second; ++j) sum += row[j];
            totals(i, s) = sum;
        }
    }
    return totals;
}

void assign_clusters(const Matrix& points, const Matrix& centroids,
                     std::vector<int>& assignment, std::vector<double>& dist2) {
    const std::size_t n = points.rows();
    const std::size_t k = centroids.rows();
    assignment.resize(n);
    dist2.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        int best = 0;
        double best_d = sq_dist(points.row(i), centroids.row(0));
        for (std::size_t c = 1; c < k; ++c) {
            const double d = sq_dist(points.row(i), centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignment[i] = best;
        dist2[i] = best_d;
    }
}

namespace {

void dijkstra_heap(const AdjacencyList& adj, std::size_t source, double* dist) {
    const std::size_t n = adj.size();
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) dist[i] = inf;
    dist[source] = 0.0;
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, static_cast<std::uint32_t>(source));
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue; // stale entry
        for (auto [v, w] : adj[u]) {
            const double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
}

} // namespace

Matrix geodesic_all_pairs(const AdjacencyList& adj) {
    const std::size_t n = adj.size();
    Matrix d(n, n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        dijkstra_heap(adj, static_cast<std::size_t>(i), d.row(i).data());
    return d;
}

} // namespace specmap::kernels
