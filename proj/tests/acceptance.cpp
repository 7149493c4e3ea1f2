// Acceptance checks for the spectral-map pipeline.
//
// Thirteen numbered checks, each pinning one behavioral contract of the
// library or the CLI: embedding dualities, manifold recovery, cluster
// scoring, SVM optimality, cross-validation hygiene, entropy identities,
// graph connectivity handling, thread-count determinism, and the shape of
// the replay outputs. Every check states an explicit tolerance and either
// passes or fails; there is no partial credit. Checks 12 and 13 shell out
// to the CLI binary, so the runner takes its path on the command line:
//
//   specmap_acceptance <path-to-specmap-cli> [work-dir]
//
// The work directory (a fresh temp dir by default) is kept on failure for
// post-mortem and removed when everything passes. Exit code is the number
// of failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "specmap/cluster_eval.hpp"
#include "specmap/dataset.hpp"
#include "specmap/error.hpp"
#include "specmap/harness.hpp"
#include "specmap/linear_embed.hpp"
#include "specmap/manifold_embed.hpp"
#include "specmap/matrix.hpp"
#include "specmap/rng.hpp"
#include "specmap/spectral_stats.hpp"
#include "specmap/svm.hpp"

#include "fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using specmap::Matrix;

namespace {

struct check_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw check_error(msg);
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string g_cli;  // path to the specmap binary, argv[1]
fs::path g_work;    // scratch root shared by the CLI-driven checks

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    require(in.good(), "cannot open " + p.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::size_t field_count(const std::string& line) {
    return 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    require(in.good(), "cannot open " + p.string());
    return json::parse(in);
}

void run_cli(const std::string& args, const fs::path& log) {
    require(!g_cli.empty(), "no CLI path given on the command line");
    const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    require(rc == 0, "CLI exited with status " + std::to_string(rc) + ": " + cmd);
}

// ---------------------------------------------------------------------------
// 1. cmds on Euclidean distances is dual to pca: eigenvalues scale by N-1,
//    coordinates agree up to per-column sign.

void check_duality() {
    const auto x = fixtures::gaussian_cloud(50, 10, 4242);
    const auto p = specmap::pca(x, 10);
    const auto m = specmap::cmds(specmap::euclidean_distances(x), 10);

    for (std::size_t i = 0; i < 10; ++i) {
        const double want = 49.0 * p.eigenvalues[i];
        const double rel = std::abs(m.eigenvalues[i] - want) / std::abs(want);
        require(rel < 1e-6, "eigenvalue " + std::to_string(i) + " rel err " + num(rel));
    }
    const double diff = fixtures::max_abs_diff(p.coords, fixtures::sign_align(p.coords, m.coords));
    require(diff < 1e-6, "coordinate mismatch " + num(diff) + " after sign alignment");
}

// ---------------------------------------------------------------------------
// 2. cmds reproduces the four corners of the unit square from their distance
//    matrix up to a rigid motion.

void check_unit_square() {
    Matrix corners(4, 2);
    corners(0, 0) = 0.0; corners(0, 1) = 0.0;
    corners(1, 0) = 1.0; corners(1, 1) = 0.0;
    corners(2, 0) = 1.0; corners(2, 1) = 1.0;
    corners(3, 0) = 0.0; corners(3, 1) = 1.0;

    const auto emb = specmap::cmds(specmap::euclidean_distances(corners), 2);
    const double res = fixtures::procrustes_residual(corners, emb.coords);
    require(res < 1e-8, "procrustes residual " + num(res));
}

// ---------------------------------------------------------------------------
// 3. On a swiss roll the geodesic embedding explains the distances that the
//    Euclidean one cannot: isomap residual variance at d=2 is small and
//    strictly below the cmds residual on the same points.

void check_swiss_roll() {
    const auto roll = fixtures::swiss_roll(1000, 777);
    const auto iso = specmap::isomap(roll.x, 10, 2);
    const double iso_res = iso.residual_variance[1];

    const auto dm = specmap::euclidean_distances(roll.x);
    const auto flat = specmap::cmds(dm, 2);
    const double cmds_res = specmap::residual_variance(dm, flat, {2})[0];

    require(iso_res < 0.05, "isomap residual at d=2 is " + num(iso_res));
    require(iso_res < cmds_res,
            "isomap residual " + num(iso_res) + " not below cmds residual " + num(cmds_res));
}

// ---------------------------------------------------------------------------
// 4. With k = N-1 every neighborhood is global, geodesics collapse to
//    Euclidean distances, and isomap reduces to cmds.

void check_full_neighborhood() {
    const auto x = fixtures::gaussian_cloud(100, 3, 909);
    const auto iso = specmap::isomap(x, 99, 3);
    const auto flat = specmap::cmds(specmap::euclidean_distances(x), 3);

    const double diff =
        fixtures::max_abs_diff(flat.coords, fixtures::sign_align(flat.coords, iso.coords));
    require(diff < 1e-6, "isomap(k=N-1) differs from cmds by " + num(diff));
}

// ---------------------------------------------------------------------------
// 5. lle invariants: rows of W sum to one, W ignores rigid motions of the
//    input, the bottom eigenvector of (I-W)^T(I-W) is constant, and a flat
//    2-D sheet is recovered up to an affine map of the unit square.

struct UnitPlane {
    Matrix x;
    Matrix latent;
};

UnitPlane unit_plane(std::size_t n, std::size_t ambient, std::uint64_t seed) {
    specmap::Rng rng(seed);
    Eigen::MatrixXd frame = Eigen::MatrixXd::NullaryExpr(
        static_cast<Eigen::Index>(ambient), 2,
        [&](Eigen::Index, Eigen::Index) { return rng.gaussian(); });
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(frame).householderQ() *
                              Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ambient), 2);
    UnitPlane p;
    p.x = Matrix(n, ambient);
    p.latent = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        p.latent(i, 0) = a;
        p.latent(i, 1) = b;
        for (std::size_t j = 0; j < ambient; ++j)
            p.x(i, j) = a * q(static_cast<Eigen::Index>(j), 0) + b * q(static_cast<Eigen::Index>(j), 1);
    }
    return p;
}

void check_lle() {
    const std::size_t n = 500;
    const auto plane = unit_plane(n, 8, 8675309);

    const auto w = specmap::lle_weights(plane.x, 10);
    for (const auto& row : w.rows) {
        double s = 0.0;
        for (const auto& [j, v] : row) s += v;
        require(std::abs(s - 1.0) <= 1e-10, "weight row sums to " + num(s));
    }

    Matrix shifted = plane.x;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 8; ++j) shifted(i, j) += 0.25 * static_cast<double>(j) - 1.5;
    specmap::Rng qrng(13);
    Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(
        8, 8, [&](Eigen::Index, Eigen::Index) { return qrng.gaussian(); });
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Matrix rotated(n, 8);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < 8; ++t)
                acc += plane.x(i, t) * q(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
            rotated(i, j) = acc;
        }

    const Matrix wd = w.dense(n);
    const double d_shift = fixtures::max_abs_diff(wd, specmap::lle_weights(shifted, 10).dense(n));
    const double d_rot = fixtures::max_abs_diff(wd, specmap::lle_weights(rotated, 10).dense(n));
    require(d_shift < 1e-9, "weights moved by " + num(d_shift) + " under translation");
    require(d_rot < 1e-9, "weights moved by " + num(d_rot) + " under rotation");

    Eigen::MatrixXd wm = fixtures::to_eigen(wd);
    Eigen::MatrixXd iw = Eigen::MatrixXd::Identity(wm.rows(), wm.cols()) - wm;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(iw.transpose() * iw);
    const Eigen::VectorXd v0 = es.eigenvectors().col(0);
    const double cosine = std::abs(v0.sum()) / (v0.norm() * std::sqrt(static_cast<double>(n)));
    require(cosine > 1.0 - 1e-8, "bottom eigenvector cosine to constant is " + num(cosine));

    const auto emb = specmap::lle(plane.x, 10, 2, 1e-6);
    const double rms = fixtures::affine_fit_rms(emb.coords, plane.latent);
    require(rms < 1e-3, "plane recovery affine rms " + num(rms));
}

// ---------------------------------------------------------------------------
// 6. Davies-Bouldin: the two-cluster hand case scores exactly 0.2, and the
//    index scales as 1/t when the separation is stretched by t.

void check_davies_bouldin() {
    for (const double t : {1.0, 2.0, 10.0}) {
        Matrix pts(4, 2);
        pts(0, 0) = 0.0;      pts(0, 1) = 0.0;
        pts(1, 0) = 0.0;      pts(1, 1) = 2.0;
        pts(2, 0) = 10.0 * t; pts(2, 1) = 0.0;
        pts(3, 0) = 10.0 * t; pts(3, 1) = 2.0;
        Matrix cent(2, 2);
        cent(0, 0) = 0.0;      cent(0, 1) = 1.0;
        cent(1, 0) = 10.0 * t; cent(1, 1) = 1.0;

        const double dbi = specmap::davies_bouldin(pts, {0, 0, 1, 1}, cent);
        const double want = 2.0 / (10.0 * t);
        require(std::abs(dbi - want) <= 1e-12,
                "dbi at separation x" + num(t) + " is " + num(dbi) + ", want " + num(want));
    }
}

// ---------------------------------------------------------------------------
// 7. k-means recovers well-separated blobs exactly across restarts. The
//    objective is checked for monotone descent inside the Lloyd loop itself
//    (a violation throws), so a mushy overlapping fixture is run too.

void check_kmeans() {
    const auto sep = fixtures::blobs({{0.0, 0.0}, {14.0, 0.0}, {0.0, 14.0}}, 40, 0.8, 6061);
    const auto rep = specmap::kmeans(sep.x, 3, 2026, 10);
    require(fixtures::same_partition(sep.labels, rep.assignments),
            "separated blobs not recovered exactly");

    const auto mushy = fixtures::blobs(
        {{0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0}, {3.0, 3.0}}, 30, 1.1, 5150);
    const auto rep2 = specmap::kmeans(mushy.x, 4, 99, 10);
    require(rep2.iterations >= 1, "overlapping fixture did not iterate");
}

// ---------------------------------------------------------------------------
// 8. SVM: the two-point problem has the known analytic dual; KKT residuals
//    on separable blobs stay within tol; XOR needs degree 2; the annulus
//    gains at least 20 accuracy points going from degree 1 to 2.

void check_svm() {
    specmap::KernelSpec lin;
    lin.degree = 1;
    lin.standardize = false;

    Matrix two(2, 1);
    two(0, 0) = -1.0;
    two(1, 0) = 1.0;
    const auto tiny = specmap::smo_train(two, {-1, +1}, 1.0, lin);
    require(tiny.n_support() == 2, "two-point model has " + std::to_string(tiny.n_support()) +
                                       " support vectors");
    for (std::size_t s = 0; s < 2; ++s) {
        const double a = tiny.coeff[s] * (tiny.support_vectors(s, 0) < 0.0 ? -1.0 : 1.0);
        require(std::abs(a - 0.5) <= 1e-6, "alpha is " + num(a));
    }
    require(std::abs(tiny.bias) <= 1e-6, "bias is " + num(tiny.bias));

    const double tol = 1e-3, c = 1.0;
    const auto data = fixtures::blobs({{0.0, 0.0}, {3.5, 3.5}}, 30, 0.6, 97531);
    const std::size_t n = data.x.rows();
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == 0 ? -1 : +1;
    const auto model = specmap::smo_train(data.x, y, c, lin, tol);
    require(model.converged, "blob model did not converge");

    std::vector<double> alpha(n, 0.0);
    for (std::size_t s = 0; s < model.n_support(); ++s) {
        bool found = false;
        for (std::size_t i = 0; i < n && !found; ++i) {
            if (alpha[i] != 0.0) continue;
            bool same = true;
            for (std::size_t j = 0; j < data.x.cols(); ++j)
                if (data.x(i, j) != model.support_vectors(s, j)) { same = false; break; }
            if (same) {
                alpha[i] = model.coeff[s] * y[i];
                found = true;
            }
        }
        require(found, "support vector " + std::to_string(s) + " matches no training row");
    }
    double coeff_sum = 0.0;
    for (const double v : model.coeff) coeff_sum += v;
    require(std::abs(coeff_sum) <= 1e-8, "sum of alpha_i y_i is " + num(coeff_sum));

    std::vector<double> f(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] == 0.0) continue;
            acc += alpha[i] * y[i] * specmap::poly_kernel(data.x.row(i), data.x.row(t), lin);
        }
        f[t] = acc - y[t];
    }
    double b_up = std::numeric_limits<double>::infinity();
    double b_low = -b_up;
    for (std::size_t i = 0; i < n; ++i) {
        const bool free = alpha[i] > 0.0 && alpha[i] < c;
        const bool in_up = free || (y[i] == +1 && alpha[i] == 0.0) || (y[i] == -1 && alpha[i] == c);
        const bool in_low = free || (y[i] == +1 && alpha[i] == c) || (y[i] == -1 && alpha[i] == 0.0);
        if (in_up) b_up = std::min(b_up, f[i]);
        if (in_low) b_low = std::max(b_low, f[i]);
    }
    require(b_low - b_up <= 2.0 * tol + 1e-9, "KKT gap is " + num(b_low - b_up));
    const double b_mid = 0.5 * (b_low + b_up);
    for (std::size_t i = 0; i < n; ++i) {
        const bool free = alpha[i] > 0.0 && alpha[i] < c;
        const bool in_up = free || (y[i] == +1 && alpha[i] == 0.0) || (y[i] == -1 && alpha[i] == c);
        const bool in_low = free || (y[i] == +1 && alpha[i] == c) || (y[i] == -1 && alpha[i] == 0.0);
        double viol = 0.0;
        if (in_up) viol = std::max(viol, b_mid - f[i]);
        if (in_low) viol = std::max(viol, f[i] - b_mid);
        require(viol <= tol + 1e-9,
                "KKT residual " + num(viol) + " at training point " + std::to_string(i));
    }

    Matrix xr(4, 2);
    xr(0, 0) = -1.0; xr(0, 1) = -1.0;
    xr(1, 0) = 1.0;  xr(1, 1) = 1.0;
    xr(2, 0) = -1.0; xr(2, 1) = 1.0;
    xr(3, 0) = 1.0;  xr(3, 1) = -1.0;
    const std::vector<int> xy = {+1, +1, -1, -1};
    auto errors_at = [&](int degree) {
        specmap::KernelSpec spec;
        spec.degree = degree;
        spec.standardize = false;
        const auto m = specmap::smo_train(xr, xy, 100.0, spec);
        int bad = 0;
        for (std::size_t i = 0; i < 4; ++i)
            if ((m.decision(xr.row(i)) > 0.0 ? +1 : -1) != xy[i]) ++bad;
        return bad;
    };
    require(errors_at(1) >= 1, "degree 1 fit the xor pattern");
    require(errors_at(2) == 0, "degree 2 failed the xor pattern");

    const auto rings = fixtures::annulus(60, 13579);
    specmap::KernelSpec k1, k2;
    k1.degree = 1;
    k2.degree = 2;
    const auto cv1 = specmap::cross_validate(rings.x, rings.labels, 5, 2025, 10.0, k1);
    const auto cv2 = specmap::cross_validate(rings.x, rings.labels, 5, 2025, 10.0, k2);
    require(cv2.mean_accuracy - cv1.mean_accuracy >= 0.20,
            "annulus accuracy gain is " + num(cv2.mean_accuracy - cv1.mean_accuracy) +
                " (degree 1: " + num(cv1.mean_accuracy) + ", degree 2: " + num(cv2.mean_accuracy) +
                ")");
}

// ---------------------------------------------------------------------------
// 9. Cross-validation hygiene: folds are stratified within +-1 per class,
//    the scaler a fold's model carries is fitted on that fold's training
//    rows alone, and a trivially separable fixture scores 100% +- 0.

void check_cv_hygiene() {
    std::vector<std::string> labels;
    for (int i = 0; i < 130; ++i)
        labels.push_back(i < 67 ? "a" : (i < 107 ? "b" : "c"));
    const std::map<std::string, double> share = {{"a", 67.0 / 5.0}, {"b", 40.0 / 5.0}, {"c", 23.0 / 5.0}};
    const auto folds = specmap::stratified_folds(labels, 5, 7171);
    for (const auto& fold : folds) {
        std::map<std::string, int> count;
        for (const auto i : fold.test) ++count[labels[i]];
        for (const auto& [cls, want] : share)
            require(std::abs(count[cls] - want) <= 1.0,
                    "class " + cls + " has " + std::to_string(count[cls]) + " of " + num(want) +
                        " expected test rows");
    }

    const auto pts = fixtures::blobs({{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}}, 20, 1.0, 31882);
    std::vector<std::string> str_labels;
    for (const int v : pts.labels) str_labels.push_back(std::to_string(v));
    const auto split = specmap::stratified_folds(str_labels, 5, 515)[0];
    Matrix train(split.train.size(), pts.x.cols());
    std::vector<int> train_labels;
    for (std::size_t r = 0; r < split.train.size(); ++r) {
        for (std::size_t j = 0; j < pts.x.cols(); ++j) train(r, j) = pts.x(split.train[r], j);
        train_labels.push_back(pts.labels[split.train[r]]);
    }
    specmap::KernelSpec spec;
    spec.degree = 2;
    const auto model = specmap::one_vs_one_train(train, train_labels, 1.0, spec);
    require(model.scaler.has_value(), "model carries no scaler");
    const auto on_train = specmap::Scaler::fit(train);
    require(model.scaler->mean == on_train.mean && model.scaler->stddev == on_train.stddev,
            "scaler does not equal the training-split fit");
    const auto on_all = specmap::Scaler::fit(pts.x);
    require(model.scaler->mean != on_all.mean,
            "scaler equals the full-corpus fit; training rows leaked");

    const auto far = fixtures::blobs({{0.0, 0.0}, {30.0, 0.0}, {0.0, 30.0}}, 20, 0.5, 41424);
    specmap::KernelSpec ksep;
    ksep.degree = 1;
    const auto cv = specmap::cross_validate(far.x, far.labels, 5, 99, 10.0, ksep);
    require(cv.all_converged, "perfect fixture did not converge");
    require(cv.mean_accuracy == 1.0 && cv.stddev == 0.0,
            "perfect fixture scored " + num(cv.mean_accuracy) + " +- " + num(cv.stddev));
}

// ---------------------------------------------------------------------------
// 10. Entropy density: per-instance profiles sum to the Shannon entropy of
//     the normalized spectrum, uniform spectra give (log2 D)/D everywhere,
//     a single spike gives an all-zero profile, and scaling the intensities
//     changes nothing.

specmap::SpectralDataset one_compound(const std::vector<std::vector<double>>& rows,
                                      double w0 = 300.0) {
    specmap::SpectralDataset ds;
    const std::size_t d = rows[0].size();
    for (std::size_t j = 0; j < d; ++j) ds.wavelengths.push_back(w0 + static_cast<double>(j));
    ds.intensities = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ds.intensities(i, j) = rows[i][j];
    ds.labels.assign(rows.size(), "x");
    ds.sample_ids.assign(rows.size(), "s0");
    ds.classes = {"x"};
    return ds;
}

void check_entropy() {
    const auto ds = fixtures::synthetic_dataset(6, 48, 6, 2468);
    for (const auto& compound : ds.classes) {
        const auto rows = ds.instances_of(compound);
        require(rows.size() == 1, "fixture should hold one instance per compound");
        const auto prof = specmap::entropy_density(ds, compound);
        std::vector<double> p(ds.n_features());
        double total = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] = std::max(ds.intensities(rows[0], j), 0.0);
            total += p[j];
        }
        for (auto& v : p) v /= total;
        const double h_sum = std::accumulate(prof.h.begin(), prof.h.end(), 0.0);
        const double want = specmap::shannon_entropy(p);
        require(std::abs(h_sum - want) <= 1e-9,
                compound + ": profile sums to " + num(h_sum) + ", entropy is " + num(want));
    }

    const auto uniform = one_compound({std::vector<double>(32, 7.5)});
    const auto up = specmap::entropy_density(uniform, "x");
    for (const double h : up.h)
        require(std::abs(h - std::log2(32.0) / 32.0) <= 1e-12, "uniform h is " + num(h));

    std::vector<double> spike(16, 0.0);
    spike[5] = 42.0;
    const auto sp = specmap::entropy_density(one_compound({spike}), "x");
    for (const double h : sp.h) require(h == 0.0, "spike h is " + num(h));
    for (const double lg : sp.log10_h)
        require(lg == sp.log_floor, "spike log10 h is " + num(lg));

    const auto base = fixtures::synthetic_dataset(12, 40, 3, 888);
    auto scaled = base;
    for (std::size_t i = 0; i < scaled.n_instances(); ++i)
        for (std::size_t j = 0; j < scaled.n_features(); ++j) scaled.intensities(i, j) *= 1000.0;
    const auto pb = specmap::entropy_density(base, "compoundB");
    const auto ps = specmap::entropy_density(scaled, "compoundB");
    for (std::size_t j = 0; j < pb.h.size(); ++j)
        require(std::abs(pb.h[j] - ps.h[j]) <= 1e-12,
                "scaling moved h by " + num(pb.h[j] - ps.h[j]));
}

// ---------------------------------------------------------------------------
// 11. Connectivity: a two-cluster fixture at k=2 is reported disconnected
//     with a full census, a large k connects it, and the sweep records bad
//     cells instead of aborting.

void check_connectivity() {
    // two 30-point chains; each is path-connected at k=2, so the census is
    // exactly two components
    Matrix x(60, 2);
    for (std::size_t i = 0; i < 30; ++i) {
        x(i, 0) = 0.5 * static_cast<double>(i);
        x(i, 1) = 0.0;
        x(30 + i, 0) = 100.0 + 0.5 * static_cast<double>(i);
        x(30 + i, 1) = 100.0;
    }

    const auto g2 = specmap::knn_graph(x, 2);
    require(g2.component_count == 2,
            "k=2 graph has " + std::to_string(g2.component_count) + " components");
    bool threw = false;
    try {
        specmap::geodesic_distances(g2);
    } catch (const specmap::DisconnectedGraphError& e) {
        threw = true;
        require(e.component_count == 2, "census says " + std::to_string(e.component_count));
        require(e.component_of.size() == 60, "census covers " +
                                                 std::to_string(e.component_of.size()) + " nodes");
    }
    require(threw, "geodesics on a disconnected graph did not throw");

    const auto g59 = specmap::knn_graph(x, 59);
    require(g59.component_count == 1, "k=59 graph is still disconnected");
    const auto dm = specmap::geodesic_distances(g59);
    require(std::isfinite(dm.values(0, 59)), "connected geodesics contain infinities");

    const auto cells =
        specmap::neighborhood_sweep(x, specmap::EmbedMethod::isomap, {2, 59}, {1, 2});
    require(cells.size() == 4, "sweep produced " + std::to_string(cells.size()) + " cells");
    for (const auto& cell : cells) {
        if (cell.k == 2) {
            require(!cell.ok && !cell.connected && cell.component_count == 2 && !cell.error.empty(),
                    "disconnected cell not marked at k=2, d=" + std::to_string(cell.d));
        } else {
            require(cell.ok && cell.connected && std::isfinite(cell.residual),
                    "connected cell failed at k=59, d=" + std::to_string(cell.d));
        }
    }

    const auto lcells = specmap::neighborhood_sweep(x, specmap::EmbedMethod::lle, {2}, {2});
    require(lcells.size() == 1 && lcells[0].ok && !lcells[0].connected,
            "lle should tolerate the disconnected graph and still mark it");
}

// ---------------------------------------------------------------------------
// 12. Determinism: the same config and seed give byte-identical outputs no
//     matter the thread count. Compared via the per-file hashes the two
//     manifests record.

void check_thread_determinism() {
    const fs::path dir = g_work / "det";
    fs::create_directories(dir);

    const auto ds = fixtures::synthetic_dataset(48, 40, 3, 555);
    const fs::path input = dir / "input.csv";
    specmap::write_dataset(ds, input.string());

    json cfg;
    cfg["input"] = input.string();
    cfg["out"] = (dir / "unused").string();
    cfg["seed"] = 42;
    cfg["regions"] = 4;
    cfg["bins"] = 6;
    cfg["neighborhoods"] = {4, 8};
    cfg["dims"] = {1, 2, 3};
    cfg["degrees"] = {1, 2};
    cfg["folds"] = 3;
    cfg["cluster_counts"] = {2, 3};
    cfg["cluster_dims"] = {2};
    const fs::path cfg_path = dir / "config.json";
    std::ofstream(cfg_path) << cfg.dump(2);

    const fs::path out_a = dir / "out_a", out_b = dir / "out_b";
    run_cli("--config \"" + cfg_path.string() + "\" --out \"" + out_a.string() + "\" --threads 1 run",
            dir / "run_a.log");
    run_cli("--config \"" + cfg_path.string() + "\" --out \"" + out_b.string() + "\" --threads 4 run",
            dir / "run_b.log");

    const json ma = load_json(out_a / "manifest.json");
    const json mb = load_json(out_b / "manifest.json");
    for (const auto& stage : ma.at("stages"))
        require(stage.at("status") == "ok",
                "stage " + stage.at("name").get<std::string>() + " not ok in run A");
    require(ma.at("files").size() >= 16, "run A recorded only " +
                                             std::to_string(ma.at("files").size()) + " files");
    require(ma.at("files") == mb.at("files"),
            "file hashes differ between 1 and 4 threads");
}

// ---------------------------------------------------------------------------
// 13. Replay shapes: default parameters on a 670x1000 six-class stand-in
//     corpus produce all eight report files with the exact row and column
//     structure the tables and figures are built from.

void check_replay_shapes() {
    const fs::path dir = g_work / "replay";
    fs::create_directories(dir);

    const auto ds = fixtures::synthetic_dataset(670, 1000, 6, 31415);
    require(specmap::knn_graph(ds.intensities, 8).component_count == 1,
            "stand-in corpus is disconnected at k=8");
    const fs::path input = dir / "input.csv";
    specmap::write_dataset(ds, input.string());

    json cfg;
    cfg["input"] = input.string();
    cfg["out"] = (dir / "out").string();
    const fs::path cfg_path = dir / "config.json";
    std::ofstream(cfg_path) << cfg.dump(2);

    run_cli("--config \"" + cfg_path.string() + "\" run", dir / "run.log");

    const fs::path out = dir / "out";
    const json manifest = load_json(out / "manifest.json");
    for (const auto& stage : manifest.at("stages"))
        require(stage.at("status") == "ok",
                "stage " + stage.at("name").get<std::string>() + " is " +
                    stage.at("status").get<std::string>());

    // defaults: 8 regions, dims 1..10, k in {8,15,30,100,200}, degrees 1..5,
    // cluster counts 2..10 over dims {2,3,5,7,10}, both nonlinear methods
    const int iso_cells = 5 * 10;
    const int cluster_cells = (2 * 5 + 2 * 5 * 5) * 9;
    const int classify_cells = (1 + 10 + 10 + 5 * 10 + 5 * 10) * 5;
    const struct {
        const char* file;
        const char* header;
        int rows;
    } shapes[] = {
        {"table1_expected_intensity.csv",
         "compound,region_low_nm,region_high_nm,expected_intensity,raw_mean", 6 * 8},
        {"table2_explained_variance.csv",
         "method,k,component,eigenvalue,explained_pct,cumulative_pct", 10 + 10 + iso_cells},
        {"table3_dbi_summary.csv", "method,k,d,n_clusters,dbi", 4},
        {"table4_accuracy_summary.csv", "method,k,d,degree,mean_accuracy_pct,stddev_pct",
         1 + 1 + 1 + 5 + 5},
        {"scree_residual_variance.csv", "method,k,d,residual_variance", 10 + 10 + iso_cells},
        {"dbi_sweep.csv", "method,k,d,n_clusters,dbi", cluster_cells},
        {"accuracy_errorbars.csv", "method,k,d,K,mean,std", classify_cells},
        {"entropy_profiles.csv", "wavelength_nm,compound,h,log10_h", 6 * 1000},
    };
    for (const auto& shape : shapes) {
        const auto lines = read_lines(out / shape.file);
        require(lines.size() == static_cast<std::size_t>(shape.rows) + 2,
                std::string(shape.file) + " has " + std::to_string(lines.size()) + " lines, want " +
                    std::to_string(shape.rows + 2));
        require(lines[0] == "# seed=42", std::string(shape.file) + " starts with '" + lines[0] + "'");
        require(lines[1] == shape.header,
                std::string(shape.file) + " header is '" + lines[1] + "'");
        const std::size_t arity = field_count(shape.header);
        for (std::size_t r = 2; r < lines.size(); ++r)
            require(field_count(lines[r]) == arity,
                    std::string(shape.file) + " row " + std::to_string(r) + " has " +
                        std::to_string(field_count(lines[r])) + " fields");
    }

    const auto table4 = read_lines(out / "table4_accuracy_summary.csv");
    require(table4[2].rfind("raw,", 0) == 0, "table4 does not lead with the raw baseline");
    require(fs::exists(out / "lines.csv") && fs::exists(out / "dataset_report.json"),
            "lines.csv or dataset_report.json missing");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    if (argc > 2) {
        g_work = argv[2];
    } else {
        g_work = fs::temp_directory_path() /
                 ("specmap_acceptance_" +
                  std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    }
    fs::create_directories(g_work);

    struct Check {
        const char* name;
        double budget_seconds; // 0 = untimed
        std::function<void()> body;
    };
    const std::vector<Check> checks = {
        {"cmds and pca duality", 1.0, check_duality},
        {"cmds unit square recovery", 0.1, check_unit_square},
        {"isomap beats cmds on the swiss roll", 30.0, check_swiss_roll},
        {"isomap at k=N-1 reduces to cmds", 0.0, check_full_neighborhood},
        {"lle invariants and plane recovery", 20.0, check_lle},
        {"davies-bouldin hand values and scaling", 0.0, check_davies_bouldin},
        {"k-means blob recovery", 0.0, check_kmeans},
        {"svm analytic dual, kkt, xor, annulus", 10.0, check_svm},
        {"cross-validation hygiene", 0.0, check_cv_hygiene},
        {"entropy density identities", 0.0, check_entropy},
        {"neighborhood graph connectivity", 0.0, check_connectivity},
        {"byte-identical runs across thread counts", 0.0, check_thread_determinism},
        {"replay output shapes on the stand-in corpus", 300.0, check_replay_shapes},
    };

    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& check = checks[i];
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            check.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t0).count();
        if (error.empty() && check.budget_seconds > 0.0 && seconds > check.budget_seconds)
            error = "took " + num(seconds) + " s, budget " + num(check.budget_seconds) + " s";
        if (error.empty()) {
            std::printf("[%2zu] pass  %-45s %8.3f s\n", i + 1, check.name, seconds);
        } else {
            ++failed;
            std::printf("[%2zu] FAIL  %-45s %8.3f s\n      %s\n", i + 1, check.name, seconds,
                        error.c_str());
        }
        std::fflush(stdout);
    }

    std::printf("%zu of %zu checks passed\n", checks.size() - static_cast<std::size_t>(failed),
                checks.size());
    if (failed == 0) {
        std::error_code ec;
        fs::remove_all(g_work, ec);
    } else {
        std::printf("work dir kept at %s\n", g_work.string().c_str());
    }
    return failed;
}
