#include "specmap/linalg.hpp"

#include <Eigen/Dense>

#include "specmap/error.hpp"

namespace specmap::linalg {

namespace {
using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

SymEig sym_eig(const Matrix& a) {
    if (a.rows() != a.cols()) throw Error("sym_eig requires a square matrix");
    Eigen::Map<const EigenRowMajor> m(a.data(), a.rows(), a.cols());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");

    const auto n = a.rows();
    SymEig out;
    out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    out.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.vectors(i, j) = solver.eigenvectors()(i, j);
    return out;
}

std::vector<double> solve_sym(const Matrix& a, const std::vector<double>& b) {
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw Error("solve_sym dimension mismatch");
    Eigen::Map<const EigenRowMajor> m(a.data(), a.rows(), a.cols());
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), b.size());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    Eigen::VectorXd w;
    if (ldlt.info() == Eigen::Success) {
        w = ldlt.solve(rhs);
    }
    if (ldlt.info() != Eigen::Success || !w.allFinite()) {
        // fall back to a least-squares solve for numerically singular systems
        w = Eigen::MatrixXd(m).completeOrthogonalDecomposition().solve(rhs);
    }
    return std::vector<double>(w.data(), w.data() + w.size());
}

} // namespace specmap::linalg
