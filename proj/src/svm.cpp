#include "specmap/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specmap/dataset.hpp"
#include "specmap/error.hpp"
#include "specmap/kernels.hpp"

namespace specmap {

namespace {

double ipow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

double poly_kernel(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
    if (a.size() != b.size()) throw Error("poly_kernel: vector length mismatch");
    double dot = spec.inhomogeneous ? 1.0 : 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) dot += a[t] * b[t];
    return ipow(dot, spec.degree);
}

Scaler Scaler::fit(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw Error("scaler needs at least 2 rows");
    Scaler s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = row[j] - s.mean[j];
            s.stddev[j] += diff * diff;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(n - 1));
        if (s.stddev[j] == 0.0) s.stddev[j] = 1.0;
    }
    return s;
}

Matrix Scaler::transform(const Matrix& x) const {
    if (x.cols() != mean.size()) throw Error("scaler dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto src = x.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = (src[j] - mean[j]) / stddev[j];
    }
    return out;
}

std::vector<double> Scaler::transform_row(std::span<const double> row) const {
    if (row.size() != mean.size()) throw Error("scaler dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / stddev[j];
    return out;
}

double SvmModel::decision(std::span<const double> z) const {
    std::vector<double> scaled;
    std::span<const double> point = z;
    if (scaler) {
        scaled = scaler->transform_row(z);
        point = scaled;
    }
    double sum = bias;
    for (std::size_t t = 0; t < coeff.size(); ++t)
        sum += coeff[t] * poly_kernel(support_vectors.row(t), point, spec);
    return sum;
}

SvmModel smo_train(const Matrix& x, const std::vector<int>& y, double c, const KernelSpec& spec,
                   double tol, long long max_iterations) {
    const std::size_t n = x.rows();
    if (y.size() != n) throw Error("smo_train: label count does not match row count");
    if (c <= 0.0) throw Error("smo_train: c must be positive");
    if (spec.degree < 1) throw Error("smo_train: kernel degree must be at least 1");
    int pos = 0;
    for (int label : y) {
        if (label != 1 && label != -1) throw Error("smo_train: labels must be +1 or -1");
        if (label == 1) ++pos;
    }
    if (pos == 0 || pos == static_cast<int>(n))
        throw Error("smo_train: both classes must be present");
    if (max_iterations <= 0) max_iterations = std::max<long long>(20000, 100 * static_cast<long long>(n));

    SvmModel model;
    model.spec = spec;

    const Matrix* data = &x;
    Matrix scaled;
    if (spec.standardize) {
        model.scaler = Scaler::fit(x);
        scaled = model.scaler->transform(x);
        data = &scaled;
    }

    const double coef0 = spec.inhomogeneous ? 1.0 : 0.0;
    const Matrix kmat = kernels::poly_kernel_matrix(*data, spec.degree, coef0);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n); // f_t = sum_j alpha_j y_j K_jt - y_t
    for (std::size_t t = 0; t < n; ++t) f[t] = -static_cast<double>(y[t]);

    const double kkt_gap = 2.0 * tol;
    long long it = 0;
    double gap = std::numeric_limits<double>::infinity();

    for (; it < max_iterations; ++it) {
        // i: worst offender among the set bounding b from below, j: from above
        std::ptrdiff_t i = -1, j = -1;
        double b_low = -std::numeric_limits<double>::infinity();
        double b_up = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool free_sv = alpha[t] > 0.0 && alpha[t] < c;
            const bool in_low = free_sv || (y[t] == 1 && alpha[t] >= c) || (y[t] == -1 && alpha[t] <= 0.0);
            const bool in_up = free_sv || (y[t] == 1 && alpha[t] <= 0.0) || (y[t] == -1 && alpha[t] >= c);
            if (in_low && f[t] > b_low) {
                b_low = f[t];
                i = static_cast<std::ptrdiff_t>(t);
            }
            if (in_up && f[t] < b_up) {
                b_up = f[t];
                j = static_cast<std::ptrdiff_t>(t);
            }
        }
        gap = b_low - b_up;
        if (gap <= kkt_gap) {
            model.converged = true;
            break;
        }

        // joint step delta applied as alpha_i += y_i*delta, alpha_j -= y_j*delta
        double lo, hi;
        if (y[i] == 1) {
            lo = -alpha[i];
            hi = c - alpha[i];
        } else {
            lo = alpha[i] - c;
            hi = alpha[i];
        }
        if (y[j] == 1) {
            lo = std::max(lo, alpha[j] - c);
            hi = std::min(hi, alpha[j]);
        } else {
            lo = std::max(lo, -alpha[j]);
            hi = std::min(hi, c - alpha[j]);
        }

        const double eta = kmat(i, i) + kmat(j, j) - 2.0 * kmat(i, j);
        double delta;
        if (eta > 1e-12) {
            delta = (f[j] - f[i]) / eta;
        } else {
            delta = lo; // flat direction: descent points toward f[j] - f[i] < 0
        }
        delta = std::clamp(delta, lo, hi);
        if (std::abs(delta) < 1e-18) break; // boxed in, no progress possible on this pair

        alpha[i] += y[i] * delta;
        alpha[j] -= y[j] * delta;
        alpha[i] = std::clamp(alpha[i], 0.0, c);
        alpha[j] = std::clamp(alpha[j], 0.0, c);

        for (std::size_t t = 0; t < n; ++t) f[t] += delta * (kmat(i, t) - kmat(j, t));
    }
    model.iterations = it;
    model.gap = gap;

    // bias from the free support vectors, midpoint of the bounds otherwise
    double fsum = 0.0;
    std::size_t fcount = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0 && alpha[t] < c) {
            fsum += f[t];
            ++fcount;
        }
    if (fcount > 0) {
        model.bias = -fsum / static_cast<double>(fcount);
    } else {
        double b_low = -std::numeric_limits<double>::infinity();
        double b_up = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_low = (y[t] == 1 && alpha[t] >= c) || (y[t] == -1 && alpha[t] <= 0.0);
            const bool in_up = (y[t] == 1 && alpha[t] <= 0.0) || (y[t] == -1 && alpha[t] >= c);
            if (in_low) b_low = std::max(b_low, f[t]);
            if (in_up) b_up = std::min(b_up, f[t]);
        }
        model.bias = -(b_low + b_up) / 2.0;
    }

    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) sv.push_back(t);
    model.support_vectors = Matrix(sv.size(), x.cols());
    model.coeff.reserve(sv.size());
    for (std::size_t r = 0; r < sv.size(); ++r) {
        const std::size_t t = sv[r];
        std::copy_n(data->row(t).data(), x.cols(), model.support_vectors.row(r).data());
        model.coeff.push_back(alpha[t] * y[t]);
    }
    return model;
}

int MulticlassSvm::predict(std::span<const double> z) const {
    std::vector<double> scaled;
    std::span<const double> point = z;
    if (scaler) {
        scaled = scaler->transform_row(z);
        point = scaled;
    }
    std::vector<int> votes(classes.size(), 0);
    std::vector<double> margin(classes.size(), 0.0);
    for (const auto& pair : pairs) {
        const double dec = pair.model.decision(point);
        if (dec > 0.0)
            ++votes[pair.a];
        else
            ++votes[pair.b];
        margin[pair.a] += dec;
        margin[pair.b] -= dec;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes.size(); ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]))
            best = c;
    }
    return classes[best];
}

std::vector<int> MulticlassSvm::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
}

bool MulticlassSvm::all_converged() const {
    return std::all_of(pairs.begin(), pairs.end(),
                       [](const Pair& p) { return p.model.converged; });
}

MulticlassSvm one_vs_one_train(const Matrix& x, const std::vector<int>& labels, double c,
                               const KernelSpec& spec, double tol, long long max_iterations) {
    const std::size_t n = x.rows();
    if (labels.size() != n) throw Error("one_vs_one_train: label count does not match row count");

    MulticlassSvm model;
    model.c = c;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                        model.classes.end());
    if (model.classes.size() < 2) throw Error("one_vs_one_train: need at least two classes");

    const Matrix* data = &x;
    Matrix scaled;
    KernelSpec pair_spec = spec;
    if (spec.standardize) {
        model.scaler = Scaler::fit(x);
        scaled = model.scaler->transform(x);
        data = &scaled;
        pair_spec.standardize = false; // already scaled once for the whole split
    }

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            std::vector<std::size_t> rows;
            std::vector<int> y;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] == model.classes[a]) {
                    rows.push_back(i);
                    y.push_back(1);
                } else if (labels[i] == model.classes[b]) {
                    rows.push_back(i);
                    y.push_back(-1);
                }
            }
            Matrix sub(rows.size(), x.cols());
            for (std::size_t r = 0; r < rows.size(); ++r)
                std::copy_n(data->row(rows[r]).data(), x.cols(), sub.row(r).data());
            MulticlassSvm::Pair pair;
            pair.a = static_cast<int>(a);
            pair.b = static_cast<int>(b);
            pair.model = smo_train(sub, y, c, pair_spec, tol, max_iterations);
            model.pairs.push_back(std::move(pair));
        }
    }
    return model;
}

CvReport cross_validate(const Matrix& x, const std::vector<int>& labels, int folds,
                        std::uint64_t seed, double c, const KernelSpec& spec, double tol,
                        long long max_iterations) {
    const std::size_t n = x.rows();
    std::vector<std::string> label_strings(n);
    for (std::size_t i = 0; i < n; ++i) label_strings[i] = std::to_string(labels[i]);
    const auto fold_sets = stratified_folds(label_strings, folds, seed);

    CvReport report;
    report.fold_accuracy.assign(folds, 0.0);
    std::vector<char> fold_converged(folds, 1);
    std::string first_error;

#pragma omp parallel for schedule(dynamic, 1)
    for (int fi = 0; fi < folds; ++fi) {
        try {
            const auto& test = fold_sets[fi].test;
            const auto& train = fold_sets[fi].train;

            Matrix train_x(train.size(), x.cols());
            std::vector<int> train_y(train.size());
            for (std::size_t r = 0; r < train.size(); ++r) {
                std::copy_n(x.row(train[r]).data(), x.cols(), train_x.row(r).data());
                train_y[r] = labels[train[r]];
            }

            const auto model = one_vs_one_train(train_x, train_y, c, spec, tol, max_iterations);
            fold_converged[fi] = model.all_converged() ? 1 : 0;

            std::size_t correct = 0;
            for (auto i : test)
                if (model.predict(x.row(i)) == labels[i]) ++correct;
            report.fold_accuracy[fi] =
                static_cast<double>(correct) / static_cast<double>(test.size());
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw Error("cross_validate fold failed: " + first_error);

    report.mean_accuracy =
        std::accumulate(report.fold_accuracy.begin(), report.fold_accuracy.end(), 0.0) / folds;
    double ss = 0.0;
    for (double a : report.fold_accuracy) {
        const double diff = a - report.mean_accuracy;
        ss += diff * diff;
    }
    report.stddev = folds > 1 ? std::sqrt(ss / (folds - 1)) : 0.0;
    report.all_converged =
        std::all_of(fold_converged.begin(), fold_converged.end(), [](char v) { return v == 1; });
    return report;
}

std::vector<AccuracyCell> accuracy_sweep(const std::vector<LabeledEmbedding>& embeddings,
                                         const std::vector<int>& labels,
                                         const std::vector<int>& degrees, int folds,
                                         std::uint64_t seed, double c, bool standardize,
                                         bool inhomogeneous, double tol,
                                         long long max_iterations) {
    std::vector<AccuracyCell> cells;
    for (const auto& emb : embeddings) {
        for (int degree : degrees) {
            AccuracyCell cell;
            cell.method = emb.method;
            cell.k = emb.k;
            cell.d = emb.d;
            cell.degree = degree;
            KernelSpec spec{degree, inhomogeneous, standardize};
            try {
                const auto rep = cross_validate(emb.coords, labels, folds, seed, c, spec, tol,
                                                max_iterations);
                cell.mean_accuracy = rep.mean_accuracy;
                cell.stddev = rep.stddev;
                cell.all_converged = rep.all_converged;
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
