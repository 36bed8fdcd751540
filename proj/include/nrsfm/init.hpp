/* init.hpp -- camera-motion initialization by orthographic factorization
 * with a rank-3 Gram correction, pseudo-inverse shape initialization, and
 * low-rank completion of partially observed tracks. */

#ifndef NRSFM_INIT_HPP
#define NRSFM_INIT_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "nrsfm/geometry.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

/* Ambiguous factors of the rank-3K truncation of W. */
struct FactorizationResult {
    Eigen::MatrixXd pi_hat;  // 2F x 3K
    Eigen::MatrixXd b_hat;   // 3K x P
    int k = 0;
};

namespace detail {

/* Thin SVD with a fixed sign convention: the largest-magnitude component
 * of every left singular vector is positive. Keeps diagnostics and file
 * outputs reproducible. */
inline void thin_svd_deterministic(const Eigen::MatrixXd& m, Eigen::MatrixXd& u,
                                   Eigen::VectorXd& sv, Eigen::MatrixXd& v) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    sv = svd.singularValues();
    v = svd.matrixV();
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index k = 0;
        u.col(c).cwiseAbs().maxCoeff(&k);
        if (u(k, c) < 0) {
            u.col(c) *= -1.0;
            v.col(c) *= -1.0;
        }
    }
}

/* Least-squares estimate of the symmetric Gram matrix X = G G^T that makes
 * every frame's corrected row pair orthonormal. */
inline Eigen::MatrixXd solve_gram_least_squares(const Eigen::MatrixXd& pi_hat) {
    const int f = static_cast<int>(pi_hat.rows()) / 2;
    const int d = static_cast<int>(pi_hat.cols());       // 3K
    const int n_unknown = d * (d + 1) / 2;               // upper triangle of X

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * f, n_unknown);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * f);

    auto idx = [d](int p, int q) {  // p <= q
        return p * d - p * (p - 1) / 2 + (q - p);
    };

    for (int i = 0; i < f; ++i) {
        const Eigen::RowVectorXd u = pi_hat.row(2 * i);
        const Eigen::RowVectorXd v = pi_hat.row(2 * i + 1);
        for (int p = 0; p < d; ++p) {
            for (int q = p; q < d; ++q) {
                const double w = (p == q) ? 1.0 : 2.0;
                a(3 * i + 0, idx(p, q)) = w * u(p) * u(q);
                a(3 * i + 1, idx(p, q)) = w * v(p) * v(q);
                a(3 * i + 2, idx(p, q)) =
                    (p == q) ? u(p) * v(p) : u(p) * v(q) + u(q) * v(p);
            }
        }
        rhs(3 * i + 0) = 1.0;
        rhs(3 * i + 1) = 1.0;
        rhs(3 * i + 2) = 0.0;
    }

    const Eigen::VectorXd x =
        a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);

    Eigen::MatrixXd gram(d, d);
    for (int p = 0; p < d; ++p)
        for (int q = p; q < d; ++q) {
            gram(p, q) = x(idx(p, q));
            gram(q, p) = x(idx(p, q));
        }
    return gram;
}

}  // namespace detail

/* Rank-3K truncated factorization of W. Throws when W is rank-deficient
 * below 3k. */
inline FactorizationResult factorize_measurements(const MeasurementMatrix& w, int k) {
    const int r = 3 * k;
    if (k < 1) throw std::invalid_argument("factorize_measurements: k must be >= 1");
    if (r > std::min<int>(2 * w.frames(), w.points()))
        throw std::invalid_argument(
            "factorize_measurements: 3k exceeds min(2F, P)");

    Eigen::MatrixXd u, v;
    Eigen::VectorXd sv;
    detail::thin_svd_deterministic(w.w, u, sv, v);
    if (sv(r - 1) <= 1e-10 * sv(0))
        throw DegenerateConfiguration(
            "factorize_measurements: W is rank-deficient below 3k = " +
            std::to_string(r) + "; try a smaller basis count k");

    FactorizationResult out;
    out.k = k;
    const Eigen::VectorXd root = sv.head(r).cwiseSqrt();
    out.pi_hat = u.leftCols(r) * root.asDiagonal();
    out.b_hat = root.asDiagonal() * v.leftCols(r).transpose();
    return out;
}

/* Recover per-frame camera rotations from centralized tracks: truncated
 * SVD, least-squares Gram correction projected to PSD rank 3, rotation
 * completion via cross product and polar projection. The per-frame sign
 * ambiguity is resolved by geodesic continuity with the previous frame. */
inline RotationSequence init_rotations(const MeasurementMatrix& w, int k) {
    const FactorizationResult fact = factorize_measurements(w, k);
    const int f = w.frames();

    Eigen::MatrixXd gram = detail::solve_gram_least_squares(fact.pi_hat);

    // PSD rank-3 projection of the Gram estimate.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const int d = static_cast<int>(gram.rows());
    Eigen::MatrixXd corrector(d, 3);  // G, 3K x 3
    for (int c = 0; c < 3; ++c) {
        const int src = d - 1 - c;  // eigenvalues ascend
        const double lam = std::max(0.0, eig.eigenvalues()(src));
        corrector.col(c) = std::sqrt(lam) * eig.eigenvectors().col(src);
    }

    const Eigen::MatrixXd motion = fact.pi_hat * corrector;  // 2F x 3

    std::vector<Eigen::Matrix3d> rots(f);
    for (int i = 0; i < f; ++i) {
        const Eigen::RowVector3d m1 = motion.row(2 * i);
        const Eigen::RowVector3d m2 = motion.row(2 * i + 1);
        const double scale = 0.5 * (m1.norm() + m2.norm());
        if (scale <= 0)
            throw DegenerateConfiguration(
                "init_rotations: zero motion rows at frame " + std::to_string(i + 1));
        Eigen::Matrix3d cand;
        cand.row(0) = m1 / scale;
        cand.row(1) = m2 / scale;
        cand.row(2) = (m1 / scale).cross(m2 / scale);
        rots[i] = project_to_so3(cand);
    }

    // Per-frame sign ambiguity (M_i vs -M_i): pick the candidate closer to
    // the previous frame so the initial path is smooth.
    const Eigen::Matrix3d flip = Eigen::Vector3d(-1, -1, 1).asDiagonal();
    for (int i = 1; i < f; ++i) {
        const Eigen::Matrix3d alt = flip * rots[i];
        if (geodesic_distance(rots[i - 1], alt) <
            geodesic_distance(rots[i - 1], rots[i]))
            rots[i] = alt;
    }
    return RotationSequence(std::move(rots));
}

/* Minimum-norm least-squares shape under orthonormal-row projectors:
 * S_i = pi_i^T W_i, which reprojects exactly. The projectors are the first
 * two rows of the given rotations. */
inline ShapeSequence init_shape_pinv(const MeasurementMatrix& w,
                                     const RotationSequence& rots) {
    if (rots.frames() != w.frames())
        throw std::invalid_argument("init_shape_pinv: frame count mismatch");
    Eigen::MatrixXd s(3 * w.frames(), w.points());
    for (int i = 0; i < w.frames(); ++i)
        s.middleRows(3 * i, 3) = rots[i].topRows<2>().transpose() * w.frame(i);
    return ShapeSequence(std::move(s), ShapeCoord::Camera);
}

struct CompletionResult {
    MeasurementMatrix w;
    bool converged = false;
    int iterations = 0;
};

/* Fill hidden cells by alternating a hard rank-r projection with a
 * visible-cell overwrite. Visible entries are preserved bit-exactly. */
inline CompletionResult complete_matrix(const MeasurementMatrix& w,
                                        const VisibilityMask& mask, int rank,
                                        int max_iters = 500, double tol = 1e-8) {
    if (mask.frames() != w.frames() || mask.points() != w.points())
        throw std::invalid_argument("complete_matrix: mask dimensions mismatch");
    if (rank < 1) throw std::invalid_argument("complete_matrix: rank must be >= 1");

    const int rows = static_cast<int>(w.w.rows());
    const int cols = static_cast<int>(w.w.cols());
    for (int r = 0; r < rows; ++r) {
        int visible = 0;
        for (int j = 0; j < cols; ++j)
            if (mask.visible(r / 2, j)) ++visible;
        if (visible < rank)
            throw std::invalid_argument("complete_matrix: row " + std::to_string(r + 1) +
                                        " has fewer than rank visible entries");
    }
    for (int j = 0; j < cols; ++j) {
        int visible = 0;
        for (int i = 0; i < mask.frames(); ++i)
            if (mask.visible(i, j)) visible += 2;
        if (visible < rank)
            throw std::invalid_argument("complete_matrix: column " + std::to_string(j + 1) +
                                        " has fewer than rank visible entries");
    }

    auto overwrite_visible = [&](Eigen::MatrixXd& x) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                if (mask.visible(i / 2, j)) x(i, j) = w.w(i, j);
    };

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, cols);
    overwrite_visible(x);

    CompletionResult result;
    for (int it = 0; it < max_iters; ++it) {
        result.iterations = it + 1;
        Eigen::MatrixXd u, v;
        Eigen::VectorXd sv;
        detail::thin_svd_deterministic(x, u, sv, v);
        const int r = std::min<int>(rank, static_cast<int>(sv.size()));
        Eigen::MatrixXd next =
            u.leftCols(r) * sv.head(r).asDiagonal() * v.leftCols(r).transpose();
        overwrite_visible(next);
        const double change = (next - x).cwiseAbs().maxCoeff();
        x = std::move(next);
        if (change < tol) {
            result.converged = true;
            break;
        }
    }
    result.w = MeasurementMatrix(std::move(x));
    return result;
}

}  // namespace nrsfm

#endif  // NRSFM_INIT_HPP
