/* geometry.hpp -- SO(3) primitives: skew operators, exponential/log maps,
 * orthogonal Procrustes. */

#ifndef NRSFM_GEOMETRY_HPP
#define NRSFM_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "nrsfm/types.hpp"

namespace nrsfm {

/* Skew-symmetric matrix of v, so that skew(v) * w == v x w. */
inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m <<     0, -v(2),  v(1),
          v(2),     0, -v(0),
         -v(1),  v(0),     0;
    return m;
}

/* Inverse of skew for an antisymmetric matrix. */
inline Eigen::Vector3d unskew(const Eigen::Matrix3d& m) {
    return Eigen::Vector3d(m(2, 1), m(0, 2), m(1, 0));
}

/* Rodrigues rotation formula. Falls back to a second-order Taylor series
 * below 1e-8 so the map is smooth through the identity. */
inline Eigen::Matrix3d exp_so3(const Eigen::Vector3d& phi) {
    const double theta = phi.norm();
    const Eigen::Matrix3d k = skew(phi);
    double a, b;  // coefficients of k and k^2
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / (theta * theta);
    }
    return Eigen::Matrix3d::Identity() + a * k + b * (k * k);
}

/* Log map returning an angle in [0, pi]. Near pi the axis is recovered
 * from the symmetric part; its overall sign comes from the antisymmetric
 * part while that is resolvable, otherwise the largest-magnitude
 * component is made positive. */
inline Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
    const double cos_theta =
        std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Eigen::Vector3d w = unskew(r - r.transpose());  // = 2 sin(theta) * axis
    // atan2 keeps full precision near pi, where acos of the trace does not.
    const double theta = std::atan2(0.5 * w.norm(), cos_theta);

    if (theta < 1e-6) {
        // axis * theta ~ w/2 with a second-order correction
        return 0.5 * (1.0 + theta * theta / 6.0) * w;
    }
    if (theta < 3.0) {
        return (theta / (2.0 * std::sin(theta))) * w;
    }

    // Near pi: (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) a a^T.
    const Eigen::Matrix3d sym = 0.5 * (r + r.transpose());
    const double one_minus_cos = 1.0 - cos_theta;
    int k = 0;
    sym.diagonal().maxCoeff(&k);
    Eigen::Vector3d axis;
    axis(k) = std::sqrt(std::max(0.0, (sym(k, k) - cos_theta) / one_minus_cos));
    for (int j = 0; j < 3; ++j)
        if (j != k) axis(j) = sym(j, k) / (one_minus_cos * axis(k));
    axis.normalize();

    if (w.norm() > 1e-8) {
        if (axis.dot(w) < 0) axis = -axis;
    } else {
        int m = 0;
        axis.cwiseAbs().maxCoeff(&m);
        if (axis(m) < 0) axis = -axis;
    }
    return theta * axis;
}

/* Nearest rotation (polar projection with det +1 enforced). */
inline Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
    return u * v.transpose();
}

/* argmin over SO(3) of ||R a - b||_F for 3 x N point sets. det +1 is
 * enforced by flipping the smallest singular direction. Throws
 * DegenerateConfiguration when a has rank < 2. */
inline Eigen::Matrix3d procrustes_rotation(const Eigen::MatrixXd& a,
                                           const Eigen::MatrixXd& b) {
    if (a.rows() != 3 || b.rows() != 3)
        throw std::invalid_argument("procrustes_rotation: point sets must be 3 x N");
    if (a.cols() != b.cols())
        throw std::invalid_argument("procrustes_rotation: point counts differ");
    if (a.cols() < 3)
        throw std::invalid_argument("procrustes_rotation: need at least 3 points");

    {
        Eigen::JacobiSVD<Eigen::MatrixXd> rank_check(a);
        const auto& sv = rank_check.singularValues();
        if (sv(1) <= 1e-12 * std::max(1.0, sv(0)))
            throw DegenerateConfiguration(
                "procrustes_rotation: source points are degenerate (rank < 2)");
    }

    const Eigen::Matrix3d m = b * a.transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
    return u * v.transpose();
}

/* Rotation angle between two rotations, ||log(r1^T r2)||, in [0, pi]. */
inline double geodesic_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
    return log_so3(r1.transpose() * r2).norm();
}

/* Orthogonality and determinant check within tol. */
inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
    return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace nrsfm

#endif  // NRSFM_GEOMETRY_HPP
