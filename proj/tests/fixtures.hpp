#pragma once

// Shared fixtures and independent oracles for the test binaries. Everything
// here is intentionally implemented without the library's own linear algebra
// helpers where it serves as a cross-check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specmap/dataset.hpp"
#include "specmap/matrix.hpp"
#include "specmap/rng.hpp"

namespace fixtures {

using specmap::Matrix;
using specmap::Rng;

inline Matrix gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.gaussian();
    return x;
}

struct LabeledPoints {
    Matrix x;
    std::vector<int> labels;
};

inline LabeledPoints blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob,
                           double spread, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t d = centers.front().size();
    LabeledPoints out;
    out.x = Matrix(centers.size() * per_blob, d);
    std::size_t row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < per_blob; ++i, ++row) {
            for (std::size_t j = 0; j < d; ++j)
                out.x(row, j) = centers[c][j] + spread * rng.gaussian();
            out.labels.push_back(static_cast<int>(c));
        }
    }
    return out;
}

struct SwissRoll {
    Matrix x;              // n x 3
    std::vector<double> t; // unrolled arc parameter
    std::vector<double> y; // height
};

inline SwissRoll swiss_roll(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    SwissRoll roll;
    roll.x = Matrix(n, 3);
    roll.t.resize(n);
    roll.y.resize(n);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 1.5 * pi * (1.0 + 2.0 * rng.uniform());
        const double y = 21.0 * rng.uniform();
        roll.t[i] = t;
        roll.y[i] = y;
        roll.x(i, 0) = t * std::cos(t);
        roll.x(i, 1) = y;
        roll.x(i, 2) = t * std::sin(t);
    }
    return roll;
}

// two concentric rings, class 0 inside
inline LabeledPoints annulus(std::size_t per_ring, std::uint64_t seed) {
    Rng rng(seed);
    LabeledPoints out;
    out.x = Matrix(2 * per_ring, 2);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < 2 * per_ring; ++i) {
        const bool outer = i >= per_ring;
        const double r = outer ? rng.uniform(2.8, 3.2) : rng.uniform(0.8, 1.2);
        const double a = rng.uniform(0.0, 2.0 * pi);
        out.x(i, 0) = r * std::cos(a);
        out.x(i, 1) = r * std::sin(a);
        out.labels.push_back(outer ? 1 : 0);
    }
    return out;
}

struct Plane {
    Matrix x;      // n x ambient
    Matrix latent; // n x 2
};

// a flat 2-D sheet embedded in ambient dimensions via an orthonormal frame
inline Plane plane_in_ambient(std::size_t n, std::size_t ambient, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd frame = Eigen::MatrixXd::NullaryExpr(
        static_cast<Eigen::Index>(ambient), 2, [&](Eigen::Index, Eigen::Index) { return rng.gaussian(); });
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(frame).householderQ() *
                              Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ambient), 2);
    Plane p;
    p.x = Matrix(n, ambient);
    p.latent = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 10.0);
        const double b = rng.uniform(0.0, 10.0);
        p.latent(i, 0) = a;
        p.latent(i, 1) = b;
        for (std::size_t j = 0; j < ambient; ++j)
            p.x(i, j) = a * q(static_cast<Eigen::Index>(j), 0) + b * q(static_cast<Eigen::Index>(j), 1);
    }
    return p;
}

// Synthetic stand-in for the spectral corpus: each class is a smooth positive
// archetype of Gaussian bumps; instances add correlated jitter. overlap
// controls how close class archetypes sit (larger = more connected kNN graph).
inline specmap::SpectralDataset synthetic_dataset(std::size_t n_instances, std::size_t n_features,
                                                  int n_classes, std::uint64_t seed,
                                                  double overlap = 1.0) {
    Rng rng(seed);
    specmap::SpectralDataset ds;
    ds.wavelengths.resize(n_features);
    const double lo = 200.0, hi = 900.0;
    for (std::size_t j = 0; j < n_features; ++j)
        ds.wavelengths[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n_features - 1);

    // class archetypes: shared baseline + class-shifted bumps
    std::vector<std::vector<double>> archetype(n_classes, std::vector<double>(n_features));
    for (int c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < n_features; ++j) {
            const double w = ds.wavelengths[j];
            double v = 40.0 + 20.0 * std::sin(w / 90.0);
            for (int b = 0; b < 4; ++b) {
                const double center = 260.0 + 120.0 * b + 14.0 * c / overlap;
                const double dw = (w - center) / 18.0;
                v += 220.0 * std::exp(-dw * dw);
            }
            archetype[c][j] = v;
        }
    }

    ds.intensities = Matrix(n_instances, n_features);
    ds.labels.resize(n_instances);
    ds.sample_ids.resize(n_instances);
    for (std::size_t i = 0; i < n_instances; ++i) {
        const int c = static_cast<int>(i % n_classes);
        const double gain = 1.0 + 0.22 * overlap * rng.gaussian();
        for (std::size_t j = 0; j < n_features; ++j) {
            const double noise = 6.0 * overlap * rng.gaussian();
            ds.intensities(i, j) = std::max(archetype[c][j] * std::abs(gain) + noise, 0.5);
        }
        ds.labels[i] = "compound" + std::string(1, static_cast<char>('A' + c));
        ds.sample_ids[i] = "S" + std::to_string(i / n_classes % 13);
    }
    ds.classes = ds.labels;
    std::sort(ds.classes.begin(), ds.classes.end());
    ds.classes.erase(std::unique(ds.classes.begin(), ds.classes.end()), ds.classes.end());
    return ds;
}

// ---- oracles ----

// flips columns of b so each correlates positively with a's column
inline Matrix sign_align(const Matrix& a, const Matrix& b) {
    Matrix out = b;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        double dot = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i) dot += a(i, c) * b(i, c);
        if (dot < 0.0)
            for (std::size_t i = 0; i < b.rows(); ++i) out(i, c) = -out(i, c);
    }
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return out;
}

// RMS residual of y against the best rigid motion (+ reflection) of x
inline double procrustes_residual(const Matrix& x_ref, const Matrix& y_in) {
    Eigen::MatrixXd x = to_eigen(x_ref);
    Eigen::MatrixXd y = to_eigen(y_in);
    x.rowwise() -= x.colwise().mean();
    y.rowwise() -= y.colwise().mean();
    const Eigen::MatrixXd c = y.transpose() * x;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
    const double err = (y * rot - x).squaredNorm() / static_cast<double>(x.rows());
    return std::sqrt(err);
}

// RMS of latent minus the best affine map from coords to latent
inline double affine_fit_rms(const Matrix& coords, const Matrix& latent) {
    const Eigen::Index n = static_cast<Eigen::Index>(coords.rows());
    Eigen::MatrixXd a(n, static_cast<Eigen::Index>(coords.cols()) + 1);
    a.leftCols(static_cast<Eigen::Index>(coords.cols())) = to_eigen(coords);
    a.col(static_cast<Eigen::Index>(coords.cols())).setOnes();
    const Eigen::MatrixXd b = to_eigen(latent);
    const Eigen::MatrixXd sol = a.completeOrthogonalDecomposition().solve(b);
    const double err = (a * sol - b).squaredNorm() / static_cast<double>(n);
    return std::sqrt(err);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// true when the two assignments induce the same partition
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<std::pair<int, int>> mapping;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool found = false;
        for (auto& [from, to] : mapping) {
            if (from == a[i]) {
                if (to != b[i]) return false;
                found = true;
                break;
            }
        }
        if (!found) {
            for (const auto& [from, to] : mapping)
                if (to == b[i]) return false; // two source clusters mapping to one target
            mapping.emplace_back(a[i], b[i]);
        }
    }
    return true;
}

} // namespace fixtures
