#include "specmap/cluster_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specmap/error.hpp"
#include "specmap/kernels.hpp"
#include "specmap/rng.hpp"

namespace specmap {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

Matrix plus_plus_init(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();
    Matrix centroids(k, dim);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t first = rng.uniform_index(n);
    std::copy_n(points.row(first).data(), dim, centroids.row(0).data());

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(c - 1)));
            total += d2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.uniform_index(n); // all mass on existing centroids: fall back to uniform
        } else {
            double target = rng.uniform() * total;
            pick = n - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy_n(points.row(pick).data(), dim, centroids.row(c).data());
    }
    return centroids;
}

struct LloydResult {
    std::vector<int> assignments;
    Matrix centroids;
    double objective = 0.0;
    int iterations = 0;
};

LloydResult lloyd(const Matrix& points, int k, Rng& rng, int max_iterations) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();

    LloydResult res;
    res.centroids = plus_plus_init(points, k, rng);
    res.assignments.assign(n, -1);

    std::vector<double> d2(n);
    std::vector<int> next(n);
    std::vector<std::size_t> counts(k);
    double prev_objective = std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_iterations; ++it) {
        kernels::assign_clusters(points, res.centroids, next, d2);
        double objective = 0.0;
        for (double v : d2) objective += v;

        // repair empty clusters by splitting the largest at its farthest member
        std::fill(counts.begin(), counts.end(), 0);
        for (int a : next) ++counts[a];
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            int donor = 0;
            for (int j = 1; j < k; ++j)
                if (counts[j] > counts[donor]) donor = j;
            std::size_t far = n;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i)
                if (next[i] == donor && d2[i] > far_d2) {
                    far_d2 = d2[i];
                    far = i;
                }
            std::copy_n(points.row(far).data(), dim, res.centroids.row(c).data());
            next[far] = c;
            --counts[donor];
            ++counts[c];
            objective -= far_d2; // the moved point now sits on its centroid
            d2[far] = 0.0;
        }

        if (!(objective <= prev_objective * (1.0 + 1e-12) + 1e-12))
            throw Error("k-means objective increased between iterations");
        prev_objective = objective;
        res.objective = objective;
        res.iterations = it + 1;

        if (next == res.assignments) break;
        res.assignments = next;

        // centroid update in fixed serial order
        Matrix sums(k, dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto p = points.row(i);
            auto s = sums.row(res.assignments[i]);
            for (std::size_t t = 0; t < dim; ++t) s[t] += p[t];
        }
        for (int c = 0; c < k; ++c) {
            auto s = sums.row(c);
            auto ce = res.centroids.row(c);
            for (std::size_t t = 0; t < dim; ++t) ce[t] = s[t] / static_cast<double>(counts[c]);
        }
    }
    return res;
}

} // namespace

ClusterReport kmeans(const Matrix& points, int n_clusters, std::uint64_t seed, int restarts,
                     int max_iterations) {
    const std::size_t n = points.rows();
    if (n_clusters < 1) throw Error("kmeans requires at least one cluster");
    if (static_cast<std::size_t>(n_clusters) > n)
        throw Error("kmeans: " + std::to_string(n_clusters) + " clusters exceed " +
                    std::to_string(n) + " points");
    if (restarts < 1) throw Error("kmeans requires at least one restart");

    LloydResult best;
    int best_restart = -1;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, "kmeans_restart", static_cast<std::uint64_t>(r)));
        LloydResult run = lloyd(points, n_clusters, rng, max_iterations);
        if (best_restart < 0 || run.objective < best.objective) {
            best = std::move(run);
            best_restart = r;
        }
    }

    ClusterReport rep;
    rep.n_clusters = n_clusters;
    rep.assignments = std::move(best.assignments);
    rep.centroids = std::move(best.centroids);
    rep.objective = best.objective;
    rep.iterations = best.iterations;
    rep.best_restart = best_restart;
    rep.seed = seed;

    rep.within_scatter.assign(n_clusters, 0.0);
    std::vector<std::size_t> counts(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = rep.assignments[i];
        rep.within_scatter[c] += std::sqrt(sq_dist(points.row(i), rep.centroids.row(c)));
        ++counts[c];
    }
    for (int c = 0; c < n_clusters; ++c)
        rep.within_scatter[c] /= static_cast<double>(std::max<std::size_t>(counts[c], 1));

    rep.dbi = n_clusters > 1 ? davies_bouldin(points, rep.assignments, rep.centroids) : 0.0;
    return rep;
}

double davies_bouldin(const Matrix& points, const std::vector<int>& assignments,
                      const Matrix& centroids) {
    const int k = static_cast<int>(centroids.rows());
    if (k < 2) throw Error("davies_bouldin needs at least two clusters");
    if (assignments.size() != points.rows())
        throw Error("davies_bouldin: assignment length does not match point count");

    std::vector<double> scatter(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const int c = assignments[i];
        if (c < 0 || c >= k) throw Error("davies_bouldin: assignment index out of range");
        scatter[c] += std::sqrt(sq_dist(points.row(i), centroids.row(c)));
        ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) throw Error("davies_bouldin: cluster " + std::to_string(c) + " is empty");
        scatter[c] /= static_cast<double>(counts[c]);
    }

    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double sep = std::sqrt(sq_dist(centroids.row(i), centroids.row(j)));
            if (sep == 0.0)
                throw Error("davies_bouldin: centroids " + std::to_string(i) + " and " +
                            std::to_string(j) + " coincide");
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    return total / k;
}

std::vector<DbiCell> dbi_sweep(const std::vector<LabeledEmbedding>& embeddings,
                               const std::vector<int>& cluster_counts, std::uint64_t seed,
                               int restarts) {
    std::vector<DbiCell> cells;
    std::uint64_t counter = 0;
    for (const auto& emb : embeddings) {
        for (int nc : cluster_counts) {
            DbiCell cell;
            cell.method = emb.method;
            cell.k = emb.k;
            cell.d = emb.d;
            cell.n_clusters = nc;
            const std::uint64_t cell_seed = derive_seed(seed, "dbi_cell", counter++);
            try {
                auto rep = kmeans(emb.coords, nc, cell_seed, restarts);
                cell.dbi = rep.dbi;
                cell.objective = rep.objective;
                cell.assignments = std::move(rep.assignments);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

} // namespace specmap
