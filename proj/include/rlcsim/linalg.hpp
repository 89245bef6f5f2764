#pragma once

// Small dense linear-algebra helpers: Kronecker products, continuous Lyapunov
// solvers (vectorized Kronecker-sum solve and a complex-Schur
// Bartels-Stewart back-substitution), and a Hurwitz test.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>

#include "rlcsim/errors.hpp"

namespace rlcsim {

template <typename Derived1, typename Derived2>
auto kron(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
    using Scalar = std::common_type_t<typename Derived1::Scalar, typename Derived2::Scalar>;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                Scalar(a(i, j)) * b.template cast<Scalar>();
    return out;
}

inline bool is_hurwitz(const Eigen::MatrixXd& a, double margin = 0.0) {
    if (a.rows() == 0) return false;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    const auto ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i).real() >= -std::max(margin, 1e-12 * scale)) return false;
    return true;
}

/// Solve A X + X A^T + Q = 0 with Q symmetric by dense vectorization:
/// (I (x) A + A (x) I) vec(X) = -vec(Q).
inline Eigen::MatrixXd lyapunov_vectorized(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    const int n = static_cast<int>(a.rows());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sys = kron(id, a) + kron(a, id);
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
    Eigen::VectorXd x = sys.partialPivLu().solve(rhs);
    if (!x.allFinite()) throw NumericError("singular Lyapunov system");
    Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (out + out.transpose());
}

/// Complex variant solving A X + X A^H + Q = 0 by vectorization.
inline Eigen::MatrixXcd lyapunov_vectorized(const Eigen::MatrixXcd& a,
                                            const Eigen::MatrixXcd& q) {
    const int n = static_cast<int>(a.rows());
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd sys = kron(id, a) + kron(a.conjugate(), id);
    Eigen::VectorXcd rhs = -Eigen::Map<const Eigen::VectorXcd>(q.data(), n * n);
    Eigen::VectorXcd x = sys.partialPivLu().solve(rhs);
    if (!x.allFinite()) throw NumericError("singular Lyapunov system");
    return Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
}

/// Solve A X + X A^H + Q = 0 via complex Schur decomposition and column-wise
/// back-substitution. O(n^3); the production path for the block-Floquet
/// systems whose vectorized form would be prohibitively large.
inline Eigen::MatrixXcd lyapunov_schur(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q) {
    const int n = static_cast<int>(a.rows());
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a, true);
    if (schur.info() != Eigen::Success) throw NumericError("Schur decomposition failed");
    const Eigen::MatrixXcd& t = schur.matrixT();
    const Eigen::MatrixXcd& u = schur.matrixU();

    Eigen::MatrixXcd qt = u.adjoint() * q * u;
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd rhs = -qt.col(j);
        for (int k = 0; k < j; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
        Eigen::MatrixXcd tj = t;
        tj.diagonal().array() += std::conj(t(j, j));
        y.col(j) = tj.triangularView<Eigen::Upper>().solve(rhs);
    }
    if (!y.allFinite()) throw NumericError("singular Lyapunov system (Schur path)");
    return u * y * u.adjoint();
}

}  // namespace rlcsim
