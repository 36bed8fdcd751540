/* eval.hpp -- normalized reconstruction error with global-ambiguity
 * removal, plus the low-rank / smoothness diagnostics used in ablations. */

#ifndef NRSFM_EVAL_HPP
#define NRSFM_EVAL_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "nrsfm/geometry.hpp"
#include "nrsfm/seqdata.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

struct EvalReport {
    double e3d = 0.0;
    Eigen::VectorXd per_frame_errors;
    bool flip_used = false;
    Eigen::Matrix3d aligning_rotation = Eigen::Matrix3d::Identity();
};

namespace detail {

inline Eigen::MatrixXd center_frames(const ShapeSequence& s) {
    Eigen::MatrixXd out = s.s;
    for (int i = 0; i < s.frames(); ++i) {
        const Eigen::Vector3d centroid = out.middleRows(3 * i, 3).rowwise().mean();
        out.middleRows(3 * i, 3).colwise() -= centroid;
    }
    return out;
}

/* Horizontal concatenation of all frames into 3 x FP. */
inline Eigen::MatrixXd concat_frames(const Eigen::MatrixXd& stacked) {
    const int f = static_cast<int>(stacked.rows()) / 3;
    const int p = static_cast<int>(stacked.cols());
    Eigen::MatrixXd out(3, f * p);
    for (int i = 0; i < f; ++i) out.middleCols(i * p, p) = stacked.middleRows(3 * i, 3);
    return out;
}

inline double mean_normalized_error(const Eigen::MatrixXd& est,
                                    const Eigen::MatrixXd& gt,
                                    const Eigen::Matrix3d& rot,
                                    Eigen::VectorXd* per_frame) {
    const int f = static_cast<int>(gt.rows()) / 3;
    if (per_frame) per_frame->resize(f);
    double total = 0.0;
    for (int i = 0; i < f; ++i) {
        const double gt_norm = gt.middleRows(3 * i, 3).norm();
        const double err =
            (rot * est.middleRows(3 * i, 3) - gt.middleRows(3 * i, 3)).norm() / gt_norm;
        if (per_frame) (*per_frame)(i) = err;
        total += err;
    }
    return total / f;
}

}  // namespace detail

/* Mean normalized per-frame error after removing one global rotation; the
 * depth-flipped estimate is also tried and the smaller error reported.
 * Scale is NOT removed. */
inline EvalReport e3d(const ShapeSequence& est, const ShapeSequence& gt) {
    if (est.frames() != gt.frames() || est.points() != gt.points())
        throw std::invalid_argument("e3d: dimension mismatch");

    const Eigen::MatrixXd gt_c = detail::center_frames(gt);
    for (int i = 0; i < gt.frames(); ++i)
        if (gt_c.middleRows(3 * i, 3).norm() == 0.0)
            throw std::invalid_argument("e3d: ground-truth frame " + std::to_string(i + 1) +
                                        " has zero norm");

    Eigen::MatrixXd est_c = detail::center_frames(est);
    Eigen::MatrixXd est_flip = est_c;
    for (int i = 0; i < est.frames(); ++i) est_flip.row(3 * i + 2) *= -1.0;

    const Eigen::MatrixXd gt_cat = detail::concat_frames(gt_c);

    EvalReport report;
    const Eigen::Matrix3d rot =
        procrustes_rotation(detail::concat_frames(est_c), gt_cat);
    Eigen::VectorXd per_frame;
    const double err = detail::mean_normalized_error(est_c, gt_c, rot, &per_frame);

    const Eigen::Matrix3d rot_flip =
        procrustes_rotation(detail::concat_frames(est_flip), gt_cat);
    Eigen::VectorXd per_frame_flip;
    const double err_flip =
        detail::mean_normalized_error(est_flip, gt_c, rot_flip, &per_frame_flip);

    if (err_flip < err) {
        report.e3d = err_flip;
        report.per_frame_errors = per_frame_flip;
        report.flip_used = true;
        report.aligning_rotation = rot_flip;
    } else {
        report.e3d = err;
        report.per_frame_errors = per_frame;
        report.flip_used = false;
        report.aligning_rotation = rot;
    }
    return report;
}

/* Sum of singular values of the rearranged sequence. */
inline double nuclear_norm_diag(const ShapeSequence& s) {
    return rearrange(s)
        .s_sharp.jacobiSvd()
        .singularValues()
        .sum();
}

/* First-order smoothness: sum_i ||S_{i+1} - S_i||_F^2. */
inline double smoothness_diag(const ShapeSequence& s) {
    double total = 0.0;
    for (int i = 0; i + 1 < s.frames(); ++i)
        total += (s.frame(i + 1) - s.frame(i)).squaredNorm();
    return total;
}

/* || O . (W - Pi S) ||_F / || O . W ||_F */
inline double reprojection_error(const MeasurementMatrix& w, const CameraPath& pi,
                                 const ShapeSequence& s,
                                 const VisibilityMask* mask = nullptr) {
    if (pi.frames() != s.frames() || w.frames() != s.frames())
        throw std::invalid_argument("reprojection_error: frame count mismatch");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < s.frames(); ++i) {
        const Eigen::MatrixXd res = w.frame(i) - pi[i] * s.frame(i);
        for (int j = 0; j < w.points(); ++j) {
            if (mask && !mask->visible(i, j)) continue;
            num += res.col(j).squaredNorm();
            den += w.frame(i).col(j).squaredNorm();
        }
    }
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace nrsfm

#endif  // NRSFM_EVAL_HPP
