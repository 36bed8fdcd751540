/* tpa.hpp -- temporally-smooth Procrustean alignment: consecutive-frame
 * alignment loss, its analytic gradient and Jacobian on so(3), a
 * frame-sweep Levenberg-Marquardt solver, and a classical GPA baseline. */

#ifndef NRSFM_TPA_HPP
#define NRSFM_TPA_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "nrsfm/geometry.hpp"
#include "nrsfm/seqdata.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

struct TpaOptions {
    int max_outer_iters = 200;       // one outer iteration = forward + backward sweep
    double lm_damping_init = 1e-3;
    double damping_up = 10.0;
    double damping_down = 0.1;
    double gradient_tolerance = 1e-8;
    int inner_iters = 10;            // per-frame LM step cap within a sweep
};

/* (1/2) sum_i || Q_i S_i - Q_{i+1} S_{i+1} ||_F^2 */
inline double tpa_loss(const RotationSequence& q, const ShapeSequence& s) {
    if (q.frames() != s.frames())
        throw std::invalid_argument("tpa_loss: frame count mismatch");
    double loss = 0.0;
    for (int i = 0; i + 1 < s.frames(); ++i)
        loss += 0.5 * (q[i] * s.frame(i) - q[i + 1] * s.frame(i + 1)).squaredNorm();
    return loss;
}

namespace detail {

/* Stacked per-point alignment residuals for frame i (3P vector), with the
 * sign arranged so the gradient is exactly J^T r with J stacking the
 * skew(Q_i s_ij)^T blocks: interior frames contribute r^(0) - r^(1), and
 * the boundary frames keep their single residual (+r^(0) at the first
 * frame, -r^(1) at the last). */
inline Eigen::VectorXd tpa_stacked_residual(const RotationSequence& q,
                                            const ShapeSequence& s, int i) {
    const int f = s.frames();
    const int p = s.points();
    const Eigen::MatrixXd qi_si = q[i] * s.frame(i);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(3 * p);
    if (i > 0) {
        const Eigen::MatrixXd prev = q[i - 1] * s.frame(i - 1) - qi_si;  // r^(1)
        for (int j = 0; j < p; ++j) r.segment<3>(3 * j) -= prev.col(j);
    }
    if (i + 1 < f) {
        const Eigen::MatrixXd next = qi_si - q[i + 1] * s.frame(i + 1);  // r^(0)
        for (int j = 0; j < p; ++j) r.segment<3>(3 * j) += next.col(j);
    }
    return r;
}

/* Portion of the TPA loss that depends on Q_i. */
inline double tpa_local_loss(const RotationSequence& q, const ShapeSequence& s, int i) {
    double loss = 0.0;
    if (i > 0)
        loss += 0.5 * (q[i - 1] * s.frame(i - 1) - q[i] * s.frame(i)).squaredNorm();
    if (i + 1 < s.frames())
        loss += 0.5 * (q[i] * s.frame(i) - q[i + 1] * s.frame(i + 1)).squaredNorm();
    return loss;
}

}  // namespace detail

/* Jacobian of the frame-i residual with respect to the so(3) update of
 * Q_i: the 3x3 blocks skew(Q_i s_{i,j})^T stacked into 3P x 3. */
inline Eigen::MatrixXd tpa_jacobian(const RotationSequence& q, const ShapeSequence& s,
                                    int i) {
    const int p = s.points();
    const Eigen::MatrixXd qi_si = q[i] * s.frame(i);
    Eigen::MatrixXd jac(3 * p, 3);
    for (int j = 0; j < p; ++j)
        jac.middleRows<3>(3 * j) = skew(qi_si.col(j)).transpose();
    return jac;
}

/* Analytic gradient of the loss with respect to the Lie-algebra update of
 * Q_i (perturbation Q_i <- exp(phi) Q_i). Equals J^T r. */
inline Eigen::Vector3d tpa_gradient(const RotationSequence& q, const ShapeSequence& s,
                                    int i) {
    if (i < 0 || i >= s.frames())
        throw std::invalid_argument("tpa_gradient: frame index out of range");
    return tpa_jacobian(q, s, i).transpose() * detail::tpa_stacked_residual(q, s, i);
}

struct TpaResult {
    RotationSequence q;
    ShapeSequence aligned;
    double final_loss = 0.0;
    int outer_iters = 0;
    std::vector<double> sweep_losses;  // loss after each outer iteration
};

namespace detail {

/* One LM pass over a single frame. Returns true if a step was accepted.
 * Accepted rotations are re-projected to SO(3). */
inline bool tpa_lm_frame_step(RotationSequence& q, const ShapeSequence& s, int i,
                              const TpaOptions& opts) {
    bool any_accepted = false;
    double damping = opts.lm_damping_init;
    for (int it = 0; it < opts.inner_iters; ++it) {
        const Eigen::MatrixXd jac = tpa_jacobian(q, s, i);
        const Eigen::VectorXd res = tpa_stacked_residual(q, s, i);
        const Eigen::Vector3d grad = jac.transpose() * res;
        if (grad.norm() < opts.gradient_tolerance) break;

        const Eigen::Matrix3d hess = jac.transpose() * jac;
        const double before = tpa_local_loss(q, s, i);
        const Eigen::Vector3d step =
            (hess + damping * Eigen::Matrix3d::Identity()).ldlt().solve(-grad);

        const Eigen::Matrix3d backup = q[i];
        q[i] = project_to_so3(exp_so3(step) * q[i]);
        const double after = tpa_local_loss(q, s, i);
        if (after < before) {
            damping *= opts.damping_down;
            any_accepted = true;
        } else {
            q[i] = backup;
            damping *= opts.damping_up;
        }
    }
    return any_accepted;
}

}  // namespace detail

/* Frame-sweep LM minimization of the TPA loss starting from Q = I. The
 * loss never increases across sweeps; on return frame 1 is gauge-fixed to
 * the identity and the aligned sequence Q S is provided. */
inline TpaResult align_tpa(const ShapeSequence& s, const TpaOptions& opts = {}) {
    if (s.frames() < 2) throw std::invalid_argument("align_tpa: need at least 2 frames");

    TpaResult result;
    result.q = RotationSequence::identity(s.frames());

    for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
        result.outer_iters = outer + 1;
        for (int i = 0; i < s.frames(); ++i)
            detail::tpa_lm_frame_step(result.q, s, i, opts);
        for (int i = s.frames() - 1; i >= 0; --i)
            detail::tpa_lm_frame_step(result.q, s, i, opts);
        result.sweep_losses.push_back(tpa_loss(result.q, s));

        double max_grad = 0.0;
        for (int i = 0; i < s.frames(); ++i)
            max_grad = std::max(max_grad, tpa_gradient(result.q, s, i).norm());
        if (max_grad < opts.gradient_tolerance) break;
    }

    // Gauge: left-multiply by Q_1^{-1} so frame 1 is the identity.
    const Eigen::Matrix3d gauge = result.q[0].transpose();
    for (int i = 0; i < s.frames(); ++i)
        result.q[i] = project_to_so3(gauge * result.q[i]);

    result.final_loss = tpa_loss(result.q, s);
    result.aligned = result.q.apply(s, ShapeCoord::Aligned);
    return result;
}

struct GpaResult {
    RotationSequence r;
    Eigen::MatrixXd mean_shape;  // 3 x P
    int iters = 0;
};

/* Classical Procrustean alignment against the running mean shape, used as
 * the ablation baseline. Shapes are column-centered by T before each
 * alignment round. */
inline GpaResult align_gpa(const ShapeSequence& s, int max_iters = 200) {
    if (s.frames() < 2) throw std::invalid_argument("align_gpa: need at least 2 frames");
    const int f = s.frames();
    const Eigen::MatrixXd t = translation_matrix(s.points());

    std::vector<Eigen::MatrixXd> centered(f);
    for (int i = 0; i < f; ++i) centered[i] = s.frame(i) * t;

    GpaResult result;
    result.r = RotationSequence::identity(f);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, s.points());
    for (int i = 0; i < f; ++i) mean += centered[i];
    mean /= f;

    for (int it = 0; it < max_iters; ++it) {
        result.iters = it + 1;
        for (int i = 0; i < f; ++i)
            result.r[i] = procrustes_rotation(centered[i], mean);
        Eigen::MatrixXd new_mean = Eigen::MatrixXd::Zero(3, s.points());
        for (int i = 0; i < f; ++i) new_mean += result.r[i] * centered[i];
        new_mean /= f;
        const double change = (new_mean - mean).norm();
        mean = std::move(new_mean);
        if (change < 1e-8) break;
    }
    result.mean_shape = mean;
    return result;
}

}  // namespace nrsfm

#endif  // NRSFM_TPA_HPP
