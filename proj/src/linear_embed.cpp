#include "specmap/linear_embed.hpp"

#include <cmath>
#include <numeric>

#include "specmap/error.hpp"
#include "specmap/kernels.hpp"
#include "specmap/linalg.hpp"

namespace specmap {

std::string method_name(EmbedMethod m) {
    switch (m) {
        case EmbedMethod::pca: return "pca";
        case EmbedMethod::cmds: return "cmds";
        case EmbedMethod::isomap: return "isomap";
        case EmbedMethod::lle: return "lle";
    }
    return "?";
}

EmbedMethod method_from_name(const std::string& name) {
    if (name == "pca") return EmbedMethod::pca;
    if (name == "cmds") return EmbedMethod::cmds;
    if (name == "isomap") return EmbedMethod::isomap;
    if (name == "lle") return EmbedMethod::lle;
    throw Error("unknown embedding method '" + name + "'");
}

DistanceMatrix euclidean_distances(const Matrix& x) {
    return {kernels::pairwise_distances(x), DistanceMatrix::Metric::euclidean};
}

namespace {

void require_finite(const Matrix& x, const char* what) {
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (double v : x.row(i))
            if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite input");
}

Matrix center_columns(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix xc(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) xc(i, j) = x(i, j) - mean[j];
    return xc;
}

// A^T A (cols x cols) or A A^T (rows x rows); upper triangle per slot, mirrored.
Matrix gram(const Matrix& a, bool transpose_first) {
    const std::size_t n = transpose_first ? a.cols() : a.rows();
    const std::size_t m = transpose_first ? a.rows() : a.cols();
    Matrix g(n, n);
    if (transpose_first) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t t = 0; t < m; ++t) s += a(t, i) * a(t, j);
                g(i, j) = s;
            }
    } else {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                auto ri = a.row(i);
                auto rj = a.row(j);
                for (std::size_t t = 0; t < m; ++t) s += ri[t] * rj[t];
                g(i, j) = s;
            }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g(j, i) = g(i, j);
    return g;
}

// Largest-magnitude loading positive; ties resolved to the smallest index.
bool needs_flip(std::span<const double> loading) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t t = 0; t < loading.size(); ++t) {
        const double a = std::abs(loading[t]);
        if (a > best_abs) {
            best_abs = a;
            best = t;
        }
    }
    return loading[best] < 0.0;
}

} // namespace

Embedding pca(const Matrix& x, int d) {
    const std::size_t n = x.rows(), dim = x.cols();
    if (n < 2) throw Error("pca needs at least 2 instances");
    const std::size_t d_max = std::min(n - 1, dim);
    if (d < 1 || static_cast<std::size_t>(d) > d_max)
        throw Error("pca target dimension " + std::to_string(d) + " out of range [1, " +
                    std::to_string(d_max) + "]");
    require_finite(x, "pca");

    const Matrix xc = center_columns(x);
    const double denom = static_cast<double>(n - 1);

    Embedding emb;
    emb.method = EmbedMethod::pca;
    emb.d = d;
    emb.coords = Matrix(n, d, 0.0);

    if (dim <= n) {
        // covariance route, D x D
        Matrix cov = gram(xc, true);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) cov(i, j) /= denom;
        auto eig = linalg::sym_eig(cov);
        double total = 0.0;
        for (double v : eig.values) total += v;

        emb.eigenvalues.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            emb.eigenvalues[j] = eig.values[dim - 1 - j]; // descending

        for (int c = 0; c < d; ++c) {
            const std::size_t col = dim - 1 - c;
            std::vector<double> loading(dim);
            for (std::size_t t = 0; t < dim; ++t) loading[t] = eig.vectors(t, col);
            const double sign = needs_flip(loading) ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                auto row = xc.row(i);
                for (std::size_t t = 0; t < dim; ++t) s += row[t] * loading[t];
                emb.coords(i, c) = sign * s;
            }
            emb.explained_variance.push_back(total > 0.0 ? emb.eigenvalues[c] / total : 0.0);
        }
    } else {
        // Gram route, N x N; covariance eigenvalues are gram eigenvalues / (N-1)
        Matrix g = gram(xc, false);
        auto eig = linalg::sym_eig(g);
        double total = 0.0;
        for (double v : eig.values) total += v / denom;

        emb.eigenvalues.resize(n);
        for (std::size_t j = 0; j < n; ++j)
            emb.eigenvalues[j] = eig.values[n - 1 - j] / denom;

        for (int c = 0; c < d; ++c) {
            const std::size_t col = n - 1 - c;
            const double s_j = std::max(eig.values[col], 0.0);
            const double scale = std::sqrt(s_j);
            // loading v = Xc^T u / sqrt(s); only its sign is needed
            double sign = 1.0;
            if (scale > 0.0) {
                std::vector<double> loading(dim, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double u_i = eig.vectors(i, col);
                    auto row = xc.row(i);
                    for (std::size_t t = 0; t < dim; ++t) loading[t] += row[t] * u_i;
                }
                sign = needs_flip(loading) ? -1.0 : 1.0;
            }
            for (std::size_t i = 0; i < n; ++i)
                emb.coords(i, c) = sign * eig.vectors(i, col) * scale;
            emb.explained_variance.push_back(total > 0.0 ? emb.eigenvalues[c] / total : 0.0);
        }
    }
    return emb;
}

Embedding cmds(const DistanceMatrix& dm, int d) {
    const std::size_t n = dm.size();
    if (n < 2) throw Error("cmds needs at least 2 points");
    if (d < 1 || static_cast<std::size_t>(d) > n - 1)
        throw Error("cmds target dimension " + std::to_string(d) + " out of range [1, " +
                    std::to_string(n - 1) + "]");

    // double centering: B = -1/2 J D^2 J
    Matrix b(n, n);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d2 = dm.values(i, j) * dm.values(i, j);
            b(i, j) = d2;
            s += d2;
        }
        row_mean[i] = s / static_cast<double>(n);
        grand += s;
    }
    grand /= static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);

    auto eig = linalg::sym_eig(b);

    Embedding emb;
    emb.method = EmbedMethod::cmds;
    emb.d = d;
    emb.coords = Matrix(n, d, 0.0);
    emb.eigenvalues.resize(n);
    double positive_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        emb.eigenvalues[j] = eig.values[n - 1 - j];
        if (eig.values[j] > 0.0) positive_sum += eig.values[j];
    }

    for (int c = 0; c < d; ++c) {
        const double lambda = emb.eigenvalues[c];
        if (lambda > 0.0) {
            const double scale = std::sqrt(lambda);
            const std::size_t col = n - 1 - c;
            for (std::size_t i = 0; i < n; ++i) emb.coords(i, c) = eig.vectors(i, col) * scale;
            emb.explained_variance.push_back(positive_sum > 0.0 ? lambda / positive_sum : 0.0);
        } else {
            // clamped: coordinates stay zero, excluded from explained variance
            ++emb.clamped_eigenvalues;
            emb.explained_variance.push_back(0.0);
        }
    }
    return emb;
}

std::vector<double> residual_variance(const DistanceMatrix& dm, const Embedding& emb,
                                      const std::vector<int>& dims) {
    const std::size_t n = dm.size();
    if (emb.coords.rows() != n) throw Error("residual_variance: embedding size mismatch");
    for (int d : dims)
        if (d < 1 || static_cast<std::size_t>(d) > emb.coords.cols())
            throw Error("residual_variance: dimension " + std::to_string(d) +
                        " exceeds embedding columns");

    const std::size_t n_pairs = n * (n - 1) / 2;
    std::vector<double> ref;
    ref.reserve(n_pairs);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) ref.push_back(dm.values(i, j));

    std::vector<double> out;
    out.reserve(dims.size());
    for (int d : dims) {
        const Matrix slice = emb.coords.left_cols(d);
        const Matrix ed = kernels::pairwise_distances(slice);
        std::vector<double> got;
        got.reserve(n_pairs);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) got.push_back(ed(i, j));

        const double mx = std::accumulate(ref.begin(), ref.end(), 0.0) / n_pairs;
        const double my = std::accumulate(got.begin(), got.end(), 0.0) / n_pairs;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t t = 0; t < n_pairs; ++t) {
            const double dx = ref[t] - mx;
            const double dy = got[t] - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        if (sxx <= 0.0)
            throw Error("residual_variance: reference distances are constant, correlation undefined");
        if (syy <= 0.0)
            throw Error("residual_variance: embedding distances at d=" + std::to_string(d) +
                        " are constant, correlation undefined");
        const double r = sxy / std::sqrt(sxx * syy);
        out.push_back(1.0 - r * r);
    }
    return out;
}

} // namespace specmap
