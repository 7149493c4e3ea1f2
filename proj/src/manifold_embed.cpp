#include "specmap/manifold_embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "specmap/error.hpp"
#include "specmap/linalg.hpp"

namespace specmap {

std::vector<std::size_t> NeighborhoodGraph::component_sizes() const {
    std::vector<std::size_t> sizes(component_count, 0);
    for (int c : component_of) ++sizes[c];
    return sizes;
}

namespace {

// k nearest neighbors per node, ties toward the smaller index.
std::vector<std::vector<std::uint32_t>> directed_knn(const Matrix& dist, int k) {
    const std::size_t n = dist.rows();
    std::vector<std::vector<std::uint32_t>> nbrs(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        std::vector<std::pair<double, std::uint32_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != static_cast<std::size_t>(i))
                cand.emplace_back(dist(i, j), static_cast<std::uint32_t>(j));
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        auto& out = nbrs[i];
        out.reserve(k);
        for (int t = 0; t < k; ++t) out.push_back(cand[t].second);
        std::sort(out.begin(), out.end());
    }
    return nbrs;
}

void check_k(std::size_t n, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > n - 1)
        throw Error("neighborhood size k=" + std::to_string(k) + " out of range [1, " +
                    std::to_string(n - 1) + "]");
}

} // namespace

NeighborhoodGraph knn_graph(const Matrix& x, int k) {
    const std::size_t n = x.rows();
    if (n < 2) throw Error("knn_graph needs at least 2 points");
    check_k(n, k);

    const Matrix dist = kernels::pairwise_distances(x);
    const auto nbrs = directed_knn(dist, k);

    NeighborhoodGraph g;
    g.n_nodes = n;
    g.k = k;
    g.adjacency.resize(n);

    // union symmetrization: i-j linked if either picked the other
    std::vector<std::vector<std::uint32_t>> incoming(n);
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : nbrs[i]) incoming[j].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> merged = nbrs[i];
        merged.insert(merged.end(), incoming[i].begin(), incoming[i].end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        auto& adj = g.adjacency[i];
        adj.reserve(merged.size());
        for (auto j : merged) adj.emplace_back(j, dist(i, j));
    }

    // component census by BFS
    g.component_of.assign(n, -1);
    std::vector<std::uint32_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (g.component_of[s] != -1) continue;
        const int comp = g.component_count++;
        stack.push_back(static_cast<std::uint32_t>(s));
        g.component_of[s] = comp;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto [v, w] : g.adjacency[u]) {
                (void)w;
                if (g.component_of[v] == -1) {
                    g.component_of[v] = comp;
                    stack.push_back(v);
                }
            }
        }
    }
    return g;
}

DistanceMatrix geodesic_distances(const NeighborhoodGraph& g) {
    if (g.component_count != 1) {
        auto sizes = g.component_sizes();
        std::string msg = "neighborhood graph (k=" + std::to_string(g.k) + ") is disconnected: " +
                          std::to_string(g.component_count) + " components of sizes";
        for (auto s : sizes) msg += " " + std::to_string(s);
        throw DisconnectedGraphError(msg, g.component_of, g.component_count);
    }
    Matrix d = kernels::geodesic_all_pairs(g.adjacency);
    // upper triangle authoritative: exact symmetry, values stay path sums
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = i + 1; j < d.cols(); ++j) d(j, i) = d(i, j);
    return {std::move(d), DistanceMatrix::Metric::geodesic};
}

Embedding isomap(const Matrix& x, int k, int d) {
    const auto g = knn_graph(x, k);
    const auto geo = geodesic_distances(g); // throws with the failing k on disconnection
    Embedding emb = cmds(geo, d);
    emb.method = EmbedMethod::isomap;
    emb.k = k;
    std::vector<int> dims(d);
    std::iota(dims.begin(), dims.end(), 1);
    emb.residual_variance = residual_variance(geo, emb, dims);
    return emb;
}

Matrix ReconstructionWeights::dense(std::size_t n) const {
    Matrix w(n, n, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto [j, v] : rows[i]) w(i, j) = v;
    return w;
}

ReconstructionWeights lle_weights(const Matrix& x, int k, double reg_scale) {
    const std::size_t n = x.rows();
    if (n < 2) throw Error("lle_weights needs at least 2 points");
    check_k(n, k);

    const Matrix dist = kernels::pairwise_distances(x);
    const auto nbrs = directed_knn(dist, k);
    const std::size_t dim = x.cols();

    ReconstructionWeights w;
    w.k = k;
    w.reg_scale = reg_scale;
    w.rows.resize(n);

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto& nb = nbrs[i];
        // local Gram of neighbor offsets
        Matrix c(k, k);
        for (int a = 0; a < k; ++a) {
            for (int b = a; b < k; ++b) {
                double s = 0.0;
                auto xi = x.row(i);
                auto xa = x.row(nb[a]);
                auto xb = x.row(nb[b]);
                for (std::size_t t = 0; t < dim; ++t) s += (xi[t] - xa[t]) * (xi[t] - xb[t]);
                c(a, b) = s;
                c(b, a) = s;
            }
        }
        double trace = 0.0;
        for (int a = 0; a < k; ++a) trace += c(a, a);
        if (trace > 0.0) {
            const double reg = reg_scale * trace / k;
            for (int a = 0; a < k; ++a) c(a, a) += reg;
        }
        auto sol = linalg::solve_sym(c, std::vector<double>(k, 1.0));
        double sum = std::accumulate(sol.begin(), sol.end(), 0.0);
        if (sum == 0.0 || !std::isfinite(sum)) {
            std::fill(sol.begin(), sol.end(), 1.0); // coincident neighborhood: uniform weights
            sum = static_cast<double>(k);
        }
        auto& row = w.rows[i];
        row.reserve(k);
        for (int a = 0; a < k; ++a) row.emplace_back(nb[a], sol[a] / sum);
        // force the sum-to-one invariant through the largest entry
        double err = -1.0;
        std::size_t largest = 0;
        for (std::size_t a = 0; a < row.size(); ++a) {
            err += row[a].second;
            if (std::abs(row[a].second) > std::abs(row[largest].second)) largest = a;
        }
        row[largest].second -= err;
    }
    return w;
}

Embedding lle(const Matrix& x, int k, int d, double reg_scale) {
    const std::size_t n = x.rows();
    if (n < 3) throw Error("lle needs at least 3 points");
    check_k(n, k);
    if (d < 1 || static_cast<std::size_t>(d) > n - 2)
        throw Error("lle target dimension " + std::to_string(d) + " out of range [1, " +
                    std::to_string(n - 2) + "]");

    const auto graph = knn_graph(x, k);
    if (graph.component_count != 1)
        std::fprintf(stderr,
                     "warning: lle neighborhood graph (k=%d) has %d components; embedding quality "
                     "degrades on disconnected data\n",
                     k, graph.component_count);

    const auto w = lle_weights(x, k, reg_scale);

    // M = (I-W)^T (I-W), accumulated from sparse rows of I-W
    Matrix m(n, n, 0.0);
    std::vector<std::pair<std::uint32_t, double>> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        row.emplace_back(static_cast<std::uint32_t>(i), 1.0);
        for (auto [j, v] : w.rows[i]) row.emplace_back(j, -v);
        for (auto [a, va] : row)
            for (auto [b, vb] : row) m(a, b) += va * vb;
    }

    auto eig = linalg::sym_eig(m); // ascending; values[0] ~ 0 with constant eigenvector

    Embedding emb;
    emb.method = EmbedMethod::lle;
    emb.k = k;
    emb.d = d;
    emb.coords = Matrix(n, d);
    const double scale = std::sqrt(static_cast<double>(n));
    for (int c = 0; c < d; ++c) {
        emb.eigenvalues.push_back(eig.values[c + 1]);
        for (std::size_t i = 0; i < n; ++i) emb.coords(i, c) = eig.vectors(i, c + 1) * scale;
    }
    return emb;
}

std::vector<SweepCell> neighborhood_sweep(const Matrix& x, EmbedMethod method,
                                          const std::vector<int>& k_values,
                                          const std::vector<int>& d_values,
                                          double lle_reg_scale) {
    if (k_values.empty() || d_values.empty())
        throw Error("neighborhood_sweep requires non-empty k and d lists");
    if (method != EmbedMethod::isomap && method != EmbedMethod::lle)
        throw Error("neighborhood_sweep supports isomap and lle only");

    const int d_max = *std::max_element(d_values.begin(), d_values.end());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<SweepCell> cells;
    for (int k : k_values) {
        // one embedding at d_max per k; cells slice its column prefixes
        Embedding full;
        bool have_full = false;
        bool connected = false;
        int components = 0;
        std::string k_error;
        try {
            const auto g = knn_graph(x, k);
            components = g.component_count;
            connected = components == 1;
            if (method == EmbedMethod::isomap) {
                if (connected) {
                    full = isomap(x, k, d_max);
                    have_full = true;
                } else {
                    k_error = "neighborhood graph (k=" + std::to_string(k) + ") is disconnected: " +
                              std::to_string(components) + " components";
                }
            } else {
                full = lle(x, k, d_max, lle_reg_scale);
                have_full = true;
            }
        } catch (const std::exception& e) {
            k_error = e.what();
        }

        for (int d : d_values) {
            SweepCell cell;
            cell.k = k;
            cell.d = d;
            cell.connected = connected;
            cell.component_count = components;
            cell.residual = nan;
            if (!have_full) {
                cell.error = k_error;
                cells.push_back(std::move(cell));
                continue;
            }
            cell.ok = true;
            cell.embedding.method = method;
            cell.embedding.k = k;
            cell.embedding.d = d;
            cell.embedding.coords = full.coords.left_cols(d);
            if (method == EmbedMethod::isomap) {
                cell.residual = full.residual_variance[d - 1];
                cell.embedding.residual_variance.assign(full.residual_variance.begin(),
                                                        full.residual_variance.begin() + d);
                cell.eigenvalues.assign(full.eigenvalues.begin(), full.eigenvalues.begin() + d);
                cell.embedding.explained_variance.assign(full.explained_variance.begin(),
                                                         full.explained_variance.begin() + d);
            } else {
                cell.eigenvalues.assign(full.eigenvalues.begin(), full.eigenvalues.begin() + d);
            }
            cell.embedding.eigenvalues = cell.eigenvalues;
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

} // namespace specmap
