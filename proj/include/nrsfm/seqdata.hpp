/* seqdata.hpp -- rearrangement operator, centralization, translation
 * elimination, measurement normalization. */

#ifndef NRSFM_SEQDATA_HPP
#define NRSFM_SEQDATA_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "nrsfm/types.hpp"

namespace nrsfm {

/* Reshuffle a 3F x P sequence into F x 3P. Row i of the output is
 * [x_i | y_i | z_i]; a K-basis sequence becomes rank K in this layout. */
inline RearrangedShape rearrange(const ShapeSequence& s) {
    const int f = s.frames();
    const int p = s.points();
    Eigen::MatrixXd out(f, 3 * p);
    for (int i = 0; i < f; ++i)
        for (int b = 0; b < 3; ++b)
            out.block(i, b * p, 1, p) = s.s.row(3 * i + b);
    return RearrangedShape(std::move(out));
}

/* Exact inverse of rearrange (a pure index permutation). */
inline ShapeSequence inverse_rearrange(const RearrangedShape& x,
                                       ShapeCoord coord = ShapeCoord::Canonical) {
    const int f = x.frames();
    const int p = x.points();
    Eigen::MatrixXd out(3 * f, p);
    for (int i = 0; i < f; ++i)
        for (int b = 0; b < 3; ++b)
            out.row(3 * i + b) = x.s_sharp.block(i, b * p, 1, p);
    return ShapeSequence(std::move(out), coord);
}

/* Same permutation applied to a raw F x 3P matrix (multipliers etc.). */
inline Eigen::MatrixXd inverse_rearrange_raw(const Eigen::MatrixXd& x) {
    const int f = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols()) / 3;
    Eigen::MatrixXd out(3 * f, p);
    for (int i = 0; i < f; ++i)
        for (int b = 0; b < 3; ++b)
            out.row(3 * i + b) = x.block(i, b * p, 1, p);
    return out;
}

/* Translation elimination projector T = I - (1/P) 1 1^T. */
inline Eigen::MatrixXd translation_matrix(int p) {
    if (p < 1) throw std::invalid_argument("translation_matrix: need p >= 1");
    return Eigen::MatrixXd::Identity(p, p) -
           Eigen::MatrixXd::Constant(p, p, 1.0 / static_cast<double>(p));
}

/* Remove the per-row mean over visible entries; invisible cells are left
 * untouched. Throws when a frame is fully occluded. */
inline MeasurementMatrix centralize(const MeasurementMatrix& w,
                                    const VisibilityMask* mask = nullptr) {
    Eigen::MatrixXd out = w.w;
    const int p = w.points();
    for (int i = 0; i < w.frames(); ++i) {
        int visible = p;
        if (mask) {
            visible = mask->visible_in_frame(i);
            if (visible == 0)
                throw std::invalid_argument(
                    "centralize: frame " + std::to_string(i + 1) + " is fully occluded");
        }
        for (int r = 2 * i; r < 2 * i + 2; ++r) {
            double mean = 0.0;
            if (mask) {
                for (int j = 0; j < p; ++j)
                    if (mask->visible(i, j)) mean += out(r, j);
                mean /= visible;
                for (int j = 0; j < p; ++j)
                    if (mask->visible(i, j)) out(r, j) -= mean;
            } else {
                mean = out.row(r).mean();
                out.row(r).array() -= mean;
            }
        }
    }
    return MeasurementMatrix(std::move(out));
}

struct NormalizedMeasurements {
    MeasurementMatrix w;
    double scale = 1.0;  // multiply reconstructed shapes by this to undo
};

/* Scale W to unit RMS entry magnitude: ||W||_F / sqrt(2FP) = 1 afterwards.
 * Returns the removed factor so outputs can be rescaled. */
inline NormalizedMeasurements normalize_scale(const MeasurementMatrix& w) {
    const double denom = std::sqrt(static_cast<double>(w.w.size()));
    const double scale = w.w.norm() / denom;
    if (scale == 0.0)
        throw std::invalid_argument("normalize_scale: measurement matrix is all zero");
    return NormalizedMeasurements{MeasurementMatrix(w.w / scale), scale};
}

}  // namespace nrsfm

#endif  // NRSFM_SEQDATA_HPP
