#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmt/common.hpp"
#include "rmt/ensembles.hpp"

namespace rmt {

// Full SVD data of a p x n sample M (p <= n): ascending singular values,
// lambda_i = sigma_i^2 / n, right vectors u_i in C^n with M u_i = sigma_i v_i,
// left vectors v_i in C^p with M* v_i = sigma_i u_i.
struct SpectralDecomposition {
    int p = 0;
    int n = 0;
    std::vector<double> sigma;
    std::vector<double> lambda;
    Eigen::MatrixXcd right_vectors;  // n x p, column i = u_i
    Eigen::MatrixXcd left_vectors;   // p x p, column i = v_i
    double residual_norm = 0.0;
};

inline SpectralDecomposition decompose(const MatrixSample& M) {
    if (M.p > M.n) throw std::invalid_argument("decompose: need p <= n");
    if (!M.entries.allFinite()) throw std::invalid_argument("decompose: non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M.entries,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
    SpectralDecomposition d;
    d.p = M.p;
    d.n = M.n;
    d.sigma.resize(M.p);
    d.lambda.resize(M.p);
    d.right_vectors.resize(M.n, M.p);
    d.left_vectors.resize(M.p, M.p);
    // Eigen orders descending; flip to ascending
    for (int i = 0; i < M.p; ++i) {
        const int src = M.p - 1 - i;
        d.sigma[i] = svd.singularValues()(src);
        d.lambda[i] = d.sigma[i] * d.sigma[i] / static_cast<double>(M.n);
        d.right_vectors.col(i) = svd.matrixV().col(src);
        d.left_vectors.col(i) = svd.matrixU().col(src);
    }
    double r = 0.0;
    for (int i = 0; i < M.p; ++i) {
        r = std::max(r, (M.entries * d.right_vectors.col(i) -
                         d.sigma[i] * d.left_vectors.col(i))
                            .norm());
        r = std::max(r, (M.entries.adjoint() * d.left_vectors.col(i) -
                         d.sigma[i] * d.right_vectors.col(i))
                            .norm());
    }
    d.residual_norm = r;
    return d;
}

// Nontrivial eigenvalues of W = M*M/n, ascending, via the p x p Gram matrix
// M M*/n (same nonzero spectrum, cheaper for p < n). With append_zeros the
// n-p trivial zeros of the n x n convention are prepended.
inline std::vector<double> covariance_spectrum(const MatrixSample& M,
                                               bool append_zeros = false) {
    if (M.p > M.n) throw std::invalid_argument("covariance_spectrum: need p <= n");
    if (!M.entries.allFinite())
        throw std::invalid_argument("covariance_spectrum: non-finite entries");
    std::vector<double> out;
    if (append_zeros) out.assign(M.n - M.p, 0.0);
    const Eigen::MatrixXcd gram =
        (M.entries * M.entries.adjoint()) / static_cast<double>(M.n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("covariance_spectrum: eigensolver failed");
    for (int i = 0; i < M.p; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

// Hermitian (p+n) x (p+n) block matrix [[0, M*], [M, 0]] with spectrum
// {+-sigma_i} and n-p zeros.
struct AugmentedMatrix {
    Eigen::MatrixXcd H;
};

inline AugmentedMatrix augmented(const MatrixSample& M) {
    const int p = M.p, n = M.n;
    AugmentedMatrix A;
    A.H = Eigen::MatrixXcd::Zero(p + n, p + n);
    A.H.topRightCorner(n, p) = M.entries.adjoint();
    A.H.bottomLeftCorner(p, n) = M.entries;
    return A;
}

// residual report from an identity verifier; max_violation <= tolerance means
// the identity held on this input
struct Report {
    std::string check;
    double max_violation = 0.0;
    int worst_index = -1;
    bool passed(double tol = 1e-8) const { return max_violation <= tol; }
};

namespace detail {

inline MatrixSample submatrix(const MatrixSample& M, int rows, int cols) {
    MatrixSample S = M;
    S.p = rows;
    S.n = cols;
    S.entries = M.entries.topLeftCorner(rows, cols).eval();
    return S;
}

inline MatrixSample transpose_sample(const MatrixSample& M) {
    MatrixSample T = M;
    T.p = M.n;
    T.n = M.p;
    T.entries = M.entries.transpose().eval();
    return T;
}

}  // namespace detail

// decompose for arbitrary shape: a wide sample (rows > cols) goes through its
// adjoint, whose SVD has the left/right vector roles swapped
inline SpectralDecomposition decompose_any(const MatrixSample& S) {
    if (S.p <= S.n) return decompose(S);
    MatrixSample A = S;
    A.p = S.n;
    A.n = S.p;
    A.entries = S.entries.adjoint().eval();
    SpectralDecomposition d = decompose(A);
    d.p = S.p;
    d.n = S.n;
    d.left_vectors.swap(d.right_vectors);
    for (std::size_t i = 0; i < d.sigma.size(); ++i)
        d.lambda[i] = d.sigma[i] * d.sigma[i] / static_cast<double>(S.n);
    return d;
}

// Cauchy interlacing for singular values: row minor gives
// sigma_i(M_{p,n}) <= sigma_i(M_{p-1,n}) <= sigma_{i+1}(M_{p,n}); column minor
// gives sigma_{i-1}(M_{p,n}) <= sigma_i(M_{p,n-1}) <= sigma_i(M_{p,n}) with
// sigma_0 = 0 (the square case uses the transpose).
inline Report verify_interlacing_law(const MatrixSample& M) {
    if (M.p < 2) throw std::invalid_argument("verify_interlacing_law: need p >= 2");
    Report rep{"interlacing_law"};
    auto note = [&](double violation, int idx) {
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.worst_index = idx;
        }
    };
    const auto full = decompose(M);
    {  // row minor
        const auto minor = decompose(detail::submatrix(M, M.p - 1, M.n));
        for (int i = 0; i + 1 < M.p; ++i) {
            note(full.sigma[i] - minor.sigma[i], i);
            note(minor.sigma[i] - full.sigma[i + 1], i);
        }
    }
    if (M.p < M.n) {  // column minor
        const auto minor = decompose(detail::submatrix(M, M.p, M.n - 1));
        for (int i = 0; i < M.p; ++i) {
            const double lower = (i == 0) ? 0.0 : full.sigma[i - 1];
            note(lower - minor.sigma[i], i);
            note(minor.sigma[i] - full.sigma[i], i);
        }
    } else {  // square: dropping a column of M is dropping a row of M^T
        const auto minor =
            decompose(detail::submatrix(detail::transpose_sample(M), M.n - 1, M.p));
        for (int i = 0; i + 1 < M.p; ++i) {
            note(full.sigma[i] - minor.sigma[i], i);
            note(minor.sigma[i] - full.sigma[i + 1], i);
        }
    }
    return rep;
}

// Weyl: |sigma_i(M) - sigma_i(N)| <= ||M - N||_op
inline Report verify_weyl(const MatrixSample& M, const MatrixSample& N) {
    if (M.p != N.p || M.n != N.n) throw std::invalid_argument("verify_weyl: shape mismatch");
    Report rep{"weyl"};
    const auto dm = decompose(M);
    const auto dn = decompose(N);
    MatrixSample diff = M;
    diff.entries = M.entries - N.entries;
    const auto dd = decompose(diff);
    const double opnorm = dd.sigma.back();
    for (int i = 0; i < M.p; ++i) {
        const double v = std::abs(dm.sigma[i] - dn.sigma[i]) - opnorm;
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.worst_index = i;
        }
    }
    return rep;
}

namespace detail {

inline void require_separation(const std::vector<double>& minor_sigma, double sigma_i,
                               double tol, const char* who) {
    for (std::size_t j = 0; j < minor_sigma.size(); ++j)
        if (std::abs(minor_sigma[j] - sigma_i) < tol)
            throw std::invalid_argument(std::string(who) +
                                        ": singular value clash at minor index " +
                                        std::to_string(j));
}

}  // namespace detail

// Coordinate formula for the last entry of a right (and left) unit singular
// vector in terms of the column (row) minor; returns |formula - direct|.
inline double verify_coordinate_formula(const MatrixSample& M, int i) {
    const auto full = decompose(M);
    if (i < 0 || i >= M.p) throw std::invalid_argument("verify_coordinate_formula: bad index");
    const double si = full.sigma[i];
    double worst = 0.0;

    {  // right vector, column split M = [M_{p,n-1} X]
        const auto minor = decompose_any(detail::submatrix(M, M.p, M.n - 1));
        const int kmax = std::min(M.p, M.n - 1);
        detail::require_separation(minor.sigma, si, 1e-8, "verify_coordinate_formula");
        const Eigen::VectorXcd X = M.entries.col(M.n - 1);
        double denom = 1.0;
        for (int j = 0; j < kmax; ++j) {
            const double sj2 = minor.sigma[j] * minor.sigma[j];
            const double gap = sj2 - si * si;
            denom += sj2 / (gap * gap) * std::norm(minor.left_vectors.col(j).dot(X));
        }
        const double direct = std::norm(full.right_vectors(M.n - 1, i));
        worst = std::max(worst, std::abs(1.0 / denom - direct));
    }

    if (M.p >= 2) {  // left vector, row split
        const auto minor = decompose(detail::submatrix(M, M.p - 1, M.n));
        const int kmax = std::min(M.p - 1, M.n);
        detail::require_separation(minor.sigma, si, 1e-8, "verify_coordinate_formula");
        const Eigen::VectorXcd Y = M.entries.row(M.p - 1).adjoint();
        double denom = 1.0;
        for (int j = 0; j < kmax; ++j) {
            const double sj2 = minor.sigma[j] * minor.sigma[j];
            const double gap = sj2 - si * si;
            denom += sj2 / (gap * gap) * std::norm(minor.right_vectors.col(j).dot(Y));
        }
        const double direct = std::norm(full.left_vectors(M.p - 1, i));
        worst = std::max(worst, std::abs(1.0 / denom - direct));
    }
    return worst;
}

// Interlacing identities: column split
//   sum_j sigma_j(minor)^2 |v_j* X|^2 / (sigma_j(minor)^2 - sigma_i^2)
//     = ||X||^2 - sigma_i^2,
// row split with Y = last row, plus the Hermitian eigenvalue form applied to
// the Gram matrix M M*/n directly.
inline Report verify_interlacing_identity(const MatrixSample& M) {
    Report rep{"interlacing_identity"};
    const auto full = decompose(M);
    auto note = [&](double resid, int idx) {
        if (resid > rep.max_violation) {
            rep.max_violation = resid;
            rep.worst_index = idx;
        }
    };
    const double scale2 = full.sigma.back() * full.sigma.back();

    {  // column split
        const auto minor = decompose_any(detail::submatrix(M, M.p, M.n - 1));
        const Eigen::VectorXcd X = M.entries.col(M.n - 1);
        const int kmax = std::min(M.p, M.n - 1);
        for (int i = 0; i < M.p; ++i) {
            const double si2 = full.sigma[i] * full.sigma[i];
            detail::require_separation(minor.sigma, full.sigma[i], 1e-8,
                                       "verify_interlacing_identity");
            double lhs = 0.0;
            for (int j = 0; j < kmax; ++j) {
                const double sj2 = minor.sigma[j] * minor.sigma[j];
                lhs += sj2 * std::norm(minor.left_vectors.col(j).dot(X)) / (sj2 - si2);
            }
            const double rhs = X.squaredNorm() - si2;
            note(std::abs(lhs - rhs) / std::max(scale2, 1.0), i);
        }
    }

    if (M.p >= 2) {  // row split
        const auto minor = decompose(detail::submatrix(M, M.p - 1, M.n));
        const Eigen::VectorXcd Y = M.entries.row(M.p - 1).adjoint();
        const int kmax = std::min(M.p - 1, M.n);
        for (int i = 0; i < M.p; ++i) {
            const double si2 = full.sigma[i] * full.sigma[i];
            detail::require_separation(minor.sigma, full.sigma[i], 1e-8,
                                       "verify_interlacing_identity");
            double lhs = 0.0;
            for (int j = 0; j < kmax; ++j) {
                const double sj2 = minor.sigma[j] * minor.sigma[j];
                lhs += sj2 * std::norm(minor.right_vectors.col(j).dot(Y)) / (sj2 - si2);
            }
            const double rhs = Y.squaredNorm() - si2;
            note(std::abs(lhs - rhs) / std::max(scale2, 1.0), i);
        }
    }

    if (M.p >= 2) {  // Hermitian eigenvalue form on the Gram matrix
        const Eigen::MatrixXcd A =
            (M.entries * M.entries.adjoint()) / static_cast<double>(M.n);
        const int q = M.p;
        const Eigen::MatrixXcd A1 = A.topLeftCorner(q - 1, q - 1);
        const Eigen::VectorXcd X = A.topRightCorner(q - 1, 1);
        const double ann = A(q - 1, q - 1).real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(A), e1(A1);
        for (int i = 0; i < q; ++i) {
            const double li = ea.eigenvalues()(i);
            double lhs = 0.0;
            for (int j = 0; j < q - 1; ++j)
                lhs += std::norm(e1.eigenvectors().col(j).dot(X)) /
                       (e1.eigenvalues()(j) - li);
            note(std::abs(lhs - (ann - li)) / std::max(ea.eigenvalues()(q - 1), 1.0), i);
        }
    }
    return rep;
}

// Both routes to the Stieltjes transform of a Hermitian matrix H at z:
// eigenvalue sum versus the Schur-complement representation with direct
// linear solves. Returns |difference|.
inline double verify_schur_stieltjes(const Eigen::MatrixXcd& H, std::complex<double> z) {
    const int p = static_cast<int>(H.rows());
    if (p < 2 || H.cols() != p)
        throw std::invalid_argument("verify_schur_stieltjes: need square p >= 2");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    for (int i = 0; i < p; ++i)
        if (std::abs(std::complex<double>(es.eigenvalues()(i), 0.0) - z) < 1e-6)
            throw std::invalid_argument("verify_schur_stieltjes: z too close to spec(H)");
    std::complex<double> lhs = 0.0;
    for (int i = 0; i < p; ++i) lhs += 1.0 / (es.eigenvalues()(i) - z);
    lhs /= static_cast<double>(p);

    std::complex<double> rhs = 0.0;
    for (int k = 0; k < p; ++k) {
        Eigen::MatrixXcd Hk(p - 1, p - 1);
        Eigen::VectorXcd ak(p - 1);
        for (int r = 0, rr = 0; r < p; ++r) {
            if (r == k) continue;
            ak(rr) = H(r, k);
            for (int c = 0, cc = 0; c < p; ++c) {
                if (c == k) continue;
                Hk(rr, cc) = H(r, c);
                ++cc;
            }
            ++rr;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ek(Hk, Eigen::EigenvaluesOnly);
        for (int i = 0; i < p - 1; ++i)
            if (std::abs(std::complex<double>(ek.eigenvalues()(i), 0.0) - z) < 1e-6)
                throw std::invalid_argument(
                    "verify_schur_stieltjes: z too close to a minor spectrum");
        const Eigen::MatrixXcd shifted =
            Hk - z * Eigen::MatrixXcd::Identity(p - 1, p - 1);
        const Eigen::VectorXcd sol = shifted.fullPivLu().solve(ak);
        rhs += 1.0 / (H(k, k) - z - ak.dot(sol));
    }
    rhs /= static_cast<double>(p);
    return std::abs(lhs - rhs);
}

}  // namespace rmt
