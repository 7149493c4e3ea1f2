#pragma once

#include <string>
#include <vector>

#include "specmap/matrix.hpp"

namespace specmap {

enum class EmbedMethod { pca, cmds, isomap, lle };

std::string method_name(EmbedMethod m);
EmbedMethod method_from_name(const std::string& name);

// A reduced N x d representation plus the diagnostics that produced it.
// eigenvalues are descending for pca/cmds/isomap; lle records the ascending
// bottom spectrum of its eigenproblem (matching coordinate column order).
// residual_variance[j] belongs to dimension j+1.
struct Embedding {
    Matrix coords;
    EmbedMethod method = EmbedMethod::pca;
    int d = 0;
    int k = -1; // neighborhood size; -1 for linear methods
    std::vector<double> eigenvalues;
    std::vector<double> explained_variance;
    std::vector<double> residual_variance;
    int clamped_eigenvalues = 0; // cmds: negative eigenvalues among the top d
};

// Coordinates tagged with where they came from, the unit the sweep drivers
// (clustering, classification) iterate over.
struct LabeledEmbedding {
    std::string method;
    int k = -1;
    int d = 0;
    Matrix coords;
};

struct DistanceMatrix {
    enum class Metric { euclidean, geodesic };
    Matrix values;
    Metric metric = Metric::euclidean;

    std::size_t size() const { return values.rows(); }
};

DistanceMatrix euclidean_distances(const Matrix& x);

// Principal components of column-centered x, descending eigenvalue order.
// Computed via the D x D covariance when D <= N, otherwise via the N x N Gram
// matrix (mandatory for spectral data where D is tens of thousands). Sign
// convention: each component's largest-magnitude loading is positive.
Embedding pca(const Matrix& x, int d);

// Classical MDS: eigendecomposition of -1/2 J D^2 J. Negative eigenvalues are
// clamped to zero (coordinates padded) and excluded from explained variance.
Embedding cmds(const DistanceMatrix& dm, int d);

// 1 - r^2 between the reference distances and the Euclidean distances of the
// first d embedding columns, for each requested d (upper triangle, i < j).
std::vector<double> residual_variance(const DistanceMatrix& dm, const Embedding& emb,
                                      const std::vector<int>& dims);

} // namespace specmap
