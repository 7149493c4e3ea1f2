#include "specmap/kernels.hpp"

#include <cmath>
#include <limits>

namespace specmap::kernels::serial {

namespace {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
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
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            d(i, j) = std::sqrt(sq_dist(x.row(i), x.row(j)));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d(j, i) = d(i, j);
    return d;
}

Matrix poly_kernel_matrix(const Matrix& x, int degree, double coef0) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            auto a = x.row(i);
            auto b = x.row(j);
            for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
            k(i, j) = ipow(s + coef0, degree);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            k(j, i) = k(i, j);
    return k;
}

Matrix region_totals(const Matrix& x, const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
    const std::size_t n = x.rows();
    Matrix totals(n, spans.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t s = 0; s < spans.size(); ++s) {
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
    assignment.resize(n);
    dist2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = sq_dist(points.row(i), centroids.row(0));
        for (std::size_t c = 1; c < centroids.rows(); ++c) {
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

// Textbook Dijkstra without a heap: repeatedly settle the unvisited node with
// the smallest tentative distance. Independent of the heap-based lane.
Matrix geodesic_all_pairs(const AdjacencyList& adj) {
    const std::size_t n = adj.size();
    const double inf = std::numeric_limits<double>::infinity();
    Matrix d(n, n);
    std::vector<char> visited(n);
    for (std::size_t s = 0; s < n; ++s) {
        double* dist = d.row(s).data();
        for (std::size_t i = 0; i < n; ++i) dist[i] = inf;
        dist[s] = 0.0;
        std::fill(visited.begin(), visited.end(), 0);
        for (std::size_t step = 0; step < n; ++step) {
            std::size_t u = n;
            double best = inf;
            for (std::size_t i = 0; i < n; ++i) {
                if (!visited[i] && dist[i] < best) {
                    best = dist[i];
                    u = i;
                }
            }
            if (u == n) break; // remaining nodes unreachable
            visited[u] = 1;
            for (auto [v, w] : adj[u]) {
                if (dist[u] + w < dist[v]) dist[v] = dist[u] + w;
            }
        }
    }
    return d;
}

} // namespace specmap::kernels::serial
