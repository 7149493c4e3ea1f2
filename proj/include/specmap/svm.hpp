#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specmap/linear_embed.hpp"
#include "specmap/matrix.hpp"

namespace specmap {

// Polynomial kernel (x.z + c0)^degree, homogeneous (c0 = 0) by default,
// c0 = 1 when the inhomogeneous flag is set.
struct KernelSpec {
    int degree = 1;
    bool inhomogeneous = false;
    bool standardize = true;
};

double poly_kernel(std::span<const double> a, std::span<const double> b, const KernelSpec& spec);

// Per-feature z-scoring, fitted on training data only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev; // sample stddev; zero-variance features map to 1

    static Scaler fit(const Matrix& x);
    Matrix transform(const Matrix& x) const;
    std::vector<double> transform_row(std::span<const double> row) const;
};

struct SvmModel {
    Matrix support_vectors;
    std::vector<double> coeff; // alpha_i * y_i per support vector
    double bias = 0.0;
    KernelSpec spec;
    std::optional<Scaler> scaler;
    bool converged = false;
    double gap = 0.0; // b_low - b_up at the last iteration
    long long iterations = 0;

    std::size_t n_support() const { return coeff.size(); }
    double decision(std::span<const double> z) const;
};

// Binary soft-margin SVM by sequential minimal optimization on the dual,
// selecting the maximal violating pair each step. Labels must be +1 or -1.
// Stops when the KKT gap b_low - b_up drops to 2*tol.
SvmModel smo_train(const Matrix& x, const std::vector<int>& y, double c, const KernelSpec& spec,
                   double tol = 1e-3, long long max_iterations = 0);

struct MulticlassSvm {
    struct Pair {
        int a = 0; // positive class (index into classes)
        int b = 0;
        SvmModel model;
    };
    std::vector<int> classes; // sorted distinct labels
    std::vector<Pair> pairs;
    std::optional<Scaler> scaler;
    double c = 1.0;

    int predict(std::span<const double> z) const;
    std::vector<int> predict(const Matrix& x) const;
    bool all_converged() const;
};

// One-vs-one decomposition: one binary machine per unordered class pair,
// majority vote, ties broken by summed signed decision values then by the
// smaller class label. Standardization is fitted once on the full training
// split and shared by every pair.
MulticlassSvm one_vs_one_train(const Matrix& x, const std::vector<int>& labels, double c,
                               const KernelSpec& spec, double tol = 1e-3,
                               long long max_iterations = 0);

struct CvReport {
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    double stddev = 0.0; // sample stddev across folds
    bool all_converged = true;
};

CvReport cross_validate(const Matrix& x, const std::vector<int>& labels, int folds,
                        std::uint64_t seed, double c, const KernelSpec& spec, double tol = 1e-3,
                        long long max_iterations = 0);

struct AccuracyCell {
    std::string method;
    int k = 0;  // neighborhood size of the source embedding, -1 for linear methods
    int d = 0;  // embedding dimension
    int degree = 0;
    bool ok = false;
    std::string error;
    double mean_accuracy = 0.0;
    double stddev = 0.0;
    bool all_converged = true;
};

// Cross-validated accuracy for every (embedding, kernel degree) combination.
// Folds depend only on the labels and seed, so every cell sees the same
// partition. Failures are captured per cell.
std::vector<AccuracyCell> accuracy_sweep(const std::vector<LabeledEmbedding>& embeddings,
                                         const std::vector<int>& labels,
                                         const std::vector<int>& degrees, int folds,
                                         std::uint64_t seed, double c, bool standardize,
                                         bool inhomogeneous, double tol = 1e-3,
                                         long long max_iterations = 0);

} // namespace specmap
