/* solver.hpp -- two-phase ADMM for the complete reconstruction model:
 * weighted truncated singular-value thresholding on the proxy sequence,
 * closed-form shape updates, an embedded LM refinement of the correction
 * rotations, multiplier/penalty schedules, and the occlusion variant. */

#ifndef NRSFM_SOLVER_HPP
#define NRSFM_SOLVER_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrsfm/csv_io.hpp"
#include "nrsfm/eval.hpp"
#include "nrsfm/geometry.hpp"
#include "nrsfm/init.hpp"
#include "nrsfm/proxy.hpp"
#include "nrsfm/segment.hpp"
#include "nrsfm/seqdata.hpp"
#include "nrsfm/tpa.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

struct SolverConfig {
    double mu1 = 1.0;   // reprojection weight
    double mu2 = 0.1;   // low-rank weight
    double mu3 = 0.1;   // temporal-smoothness weight

    double alpha_r = 1.0;       // nearly rigid fraction for the proxy kernel
    double delta_r = 1.0 / 3;   // rigid coupling in the feature map
    int m_f = 2;                // periodogram maxima per trajectory

    int k_s = 0;                // shape basis dimension; 0 = min(10, F/3)
    double xi = 1.0;            // singular-weight scale
    double gamma = 1e-6;        // singular-weight offset

    double beta0 = 1e-4;
    double beta_max = 1e10;
    double lambda_growth = 1.1;
    double beta_d = 1e-2;       // penalty restart for phase 2
    double eps = 1e-6;          // ||S_new - S||_inf stopping tolerance

    int q_inner_iters = 3;      // LM sweeps per correction-rotation update
    int max_iters = 500;        // per phase

    bool enable_q_update = true;  // false freezes Q at identity in phase 2
    bool run_phase2 = true;       // false stops after the identity-kernel phase

    int effective_k_s(int frames) const {
        if (k_s > 0) return k_s;
        return std::max(1, std::min(10, frames / 3));
    }
};

struct SolverDiagnosticsRow {
    int iteration = 0;
    double reprojection_error = 0.0;
    double lagrangian = 0.0;
    double r1 = 0.0;  // ||S_breve^sharp - g(S_hat Lambda)||_F
    double r2 = 0.0;  // ||S_hat - Q S_tilde||_F
    double r3 = 0.0;  // ||S_tilde - R_p S (T)||_F
    double beta = 0.0;
};

struct SolverDiagnostics {
    std::vector<SolverDiagnosticsRow> rows;
    int phase1_iters = 0;
    int phase2_iters = 0;
    bool phase1_converged = false;
    bool phase2_converged = false;

    void write_csv(const std::string& path) const {
        Eigen::MatrixXd m(rows.size(), 7);
        for (size_t i = 0; i < rows.size(); ++i) {
            m(i, 0) = rows[i].iteration;
            m(i, 1) = rows[i].reprojection_error;
            m(i, 2) = rows[i].lagrangian;
            m(i, 3) = rows[i].r1;
            m(i, 4) = rows[i].r2;
            m(i, 5) = rows[i].r3;
            m(i, 6) = rows[i].beta;
        }
        write_csv_matrix(path, m);
    }
};

/* All ADMM variables. Shapes S live in per-frame camera coordinates and
 * project through pi = [I2 | 0]; r_p holds the camera-to-world alignment
 * rotations (transposed camera rotations) so S_tilde = R_p S. When `mask`
 * is engaged the occluded model is active: the data term only sees visible
 * cells and shapes are recentered by T inside the S_tilde link. */
struct SolverState {
    MeasurementMatrix w;
    std::optional<VisibilityMask> mask;

    ShapeSequence s;        // camera coordinates
    ShapeSequence s_tilde;  // aligned (world) coordinates
    ShapeSequence s_hat;    // canonical coordinates
    RearrangedShape s_breve_sharp;
    RotationSequence q;
    RotationSequence r_p;
    CameraPath pi;
    WeightMatrix lam;

    Eigen::MatrixXd y1;  // F x 3P
    Eigen::MatrixXd y2;  // 3F x P
    Eigen::MatrixXd y3;  // 3F x P
    double beta = 1e-4;

    int frames() const { return w.frames(); }
    int points() const { return w.points(); }
};

/* sign(sigma) * max(|sigma| - tau, 0) */
inline double soft_threshold(double sigma, double tau) {
    const double mag = std::abs(sigma) - tau;
    return mag > 0 ? (sigma < 0 ? -mag : mag) : 0.0;
}

/* Normalized shrinkage weights: Theta_j = xi / (sigma_j + gamma), rescaled
 * so the top k_s weights sum against xi; singular values past k_s get zero
 * weight and pass unthresholded. */
inline Eigen::VectorXd weighted_singular_weights(const Eigen::VectorXd& sigmas, int k_s,
                                                 double xi, double gamma = 1e-6) {
    const int n = static_cast<int>(sigmas.size());
    const int k = std::min(k_s, n);
    if (k < 1) throw std::invalid_argument("weighted_singular_weights: k_s must be >= 1");
    Eigen::VectorXd theta(n);
    for (int j = 0; j < n; ++j) theta(j) = xi / (sigmas(j) + gamma);
    const double denom = theta.head(k).sum();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) out(j) = xi * theta(j) / denom;
    return out;
}

namespace detail {

/* g(S_hat Lambda) without the intermediate ShapeSequence. */
inline Eigen::MatrixXd rearranged_proxy(const SolverState& state) {
    return rearrange(ShapeSequence(state.s_hat.s * state.lam.lambda, ShapeCoord::Proxy))
        .s_sharp;
}

inline Eigen::MatrixXd apply_q(const SolverState& state, const Eigen::MatrixXd& stacked) {
    Eigen::MatrixXd out(stacked.rows(), stacked.cols());
    for (int i = 0; i < state.frames(); ++i)
        out.middleRows(3 * i, 3) = state.q[i] * stacked.middleRows(3 * i, 3);
    return out;
}

inline Eigen::MatrixXd apply_q_transposed(const SolverState& state,
                                          const Eigen::MatrixXd& stacked) {
    Eigen::MatrixXd out(stacked.rows(), stacked.cols());
    for (int i = 0; i < state.frames(); ++i)
        out.middleRows(3 * i, 3) = state.q[i].transpose() * stacked.middleRows(3 * i, 3);
    return out;
}

/* R_p S with the occluded model's column recentering applied when active. */
inline Eigen::MatrixXd rp_s_link(const SolverState& state) {
    Eigen::MatrixXd out(state.s.s.rows(), state.s.s.cols());
    for (int i = 0; i < state.frames(); ++i)
        out.middleRows(3 * i, 3) = state.r_p[i] * state.s.frame(i);
    if (state.mask) {
        const Eigen::MatrixXd t = translation_matrix(state.points());
        out = out * t;
    }
    return out;
}

}  // namespace detail

/* Proximal step on the reshuffled proxy sequence: SVD of g(S_hat Lambda) -
 * Y_1 / beta, soft-threshold each singular value by its normalized weight
 * times mu2 / beta, recompose. */
inline RearrangedShape update_proxy_sharp(const SolverState& state,
                                          const SolverConfig& cfg) {
    const Eigen::MatrixXd c =
        detail::rearranged_proxy(state) - state.y1 / state.beta;
    if (cfg.mu2 == 0.0) return RearrangedShape(c);

    Eigen::MatrixXd u, v;
    Eigen::VectorXd sv;
    detail::thin_svd_deterministic(c, u, sv, v);
    const Eigen::VectorXd weights =
        weighted_singular_weights(sv, cfg.effective_k_s(state.frames()), cfg.xi, cfg.gamma);
    Eigen::VectorXd shrunk(sv.size());
    for (Eigen::Index j = 0; j < sv.size(); ++j)
        shrunk(j) = soft_threshold(sv(j), weights(j) * cfg.mu2 / state.beta);
    return RearrangedShape(u * shrunk.asDiagonal() * v.transpose());
}

/* Closed form for the canonical shapes: S_hat (I + Lambda Lambda^T) =
 * Q S_tilde - Y_2/beta + g^-1(S_breve^sharp) Lambda^T + g^-1(Y_1) Lambda^T / beta. */
inline ShapeSequence update_s_hat(const SolverState& state, const SolverConfig&) {
    const Eigen::MatrixXd& lam = state.lam.lambda;
    const int p = state.points();
    const Eigen::MatrixXd lhs =
        Eigen::MatrixXd::Identity(p, p) + lam * lam.transpose();
    const Eigen::MatrixXd rhs =
        detail::apply_q(state, state.s_tilde.s) - state.y2 / state.beta +
        inverse_rearrange_raw(state.s_breve_sharp.s_sharp) * lam.transpose() +
        inverse_rearrange_raw(state.y1) * lam.transpose() / state.beta;
    // Solve X * lhs = rhs with lhs SPD.
    const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
    return ShapeSequence(llt.solve(rhs.transpose()).transpose(), ShapeCoord::Canonical);
}

/* Closed form for the aligned shapes. The system
 * (mu3/beta Q^T H^T H Q + 2I) S_tilde = Q^T S_hat + Q^T Y_2/beta + R_p S - Y_3/beta
 * couples only adjacent frames, so it is solved by block-tridiagonal
 * elimination with 3x3 pivots. */
inline ShapeSequence update_s_tilde(const SolverState& state, const SolverConfig& cfg) {
    const int f = state.frames();
    const int p = state.points();
    const double c = cfg.mu3 / state.beta;

    Eigen::MatrixXd rhs = detail::apply_q_transposed(state, state.s_hat.s) +
                          detail::apply_q_transposed(state, state.y2) / state.beta +
                          detail::rp_s_link(state) - state.y3 / state.beta;

    // Diagonal blocks (mu3/beta * c_i + 2) I and off-diagonal blocks
    // -mu3/beta Q_i^T Q_{i+1}.
    std::vector<Eigen::Matrix3d> diag(f), upper(std::max(0, f - 1));
    for (int i = 0; i < f; ++i) {
        const double c_i = (i == 0 || i == f - 1) ? (f > 1 ? 1.0 : 0.0) : 2.0;
        diag[i] = (c * c_i + 2.0) * Eigen::Matrix3d::Identity();
    }
    for (int i = 0; i + 1 < f; ++i)
        upper[i] = -c * (state.q[i].transpose() * state.q[i + 1]);

    // Block Thomas forward elimination.
    std::vector<Eigen::Matrix3d> pivot(f);
    Eigen::MatrixXd work = rhs;
    pivot[0] = diag[0];
    for (int i = 1; i < f; ++i) {
        const Eigen::Matrix3d gain =
            upper[i - 1].transpose() * pivot[i - 1].ldlt().solve(Eigen::Matrix3d::Identity());
        pivot[i] = diag[i] - gain * upper[i - 1];
        work.middleRows(3 * i, 3) -= gain * work.middleRows(3 * (i - 1), 3);
    }
    Eigen::MatrixXd out(3 * f, p);
    out.middleRows(3 * (f - 1), 3) =
        pivot[f - 1].ldlt().solve(work.middleRows(3 * (f - 1), 3));
    for (int i = f - 2; i >= 0; --i)
        out.middleRows(3 * i, 3) = pivot[i].ldlt().solve(
            work.middleRows(3 * i, 3) - upper[i] * out.middleRows(3 * (i + 1), 3));
    return ShapeSequence(std::move(out), ShapeCoord::Aligned);
}

/* Camera-frame shape update. Without a mask each frame is the 3x3 SPD
 * solve (mu1/beta Pi^T Pi + I) S_i = mu1/beta Pi^T W_i + R_p^T S_tilde_i +
 * R_p^T Y_3^i / beta. With a mask the per-frame 3P x 3P system of the
 * occluded model is assembled through the Kronecker identity; it carries a
 * one-dimensional null direction (per-frame depth offset, unobservable and
 * irrelevant downstream), so a tiny ridge picks the near-minimum-norm
 * representative. */
inline ShapeSequence update_s(const SolverState& state, const SolverConfig& cfg) {
    const int f = state.frames();
    const int p = state.points();
    const double c = cfg.mu1 / state.beta;
    Eigen::MatrixXd out(3 * f, p);

    if (!state.mask) {
        for (int i = 0; i < f; ++i) {
            const Eigen::Matrix<double, 2, 3>& pi_i = state.pi[i];
            const Eigen::Matrix3d lhs =
                c * pi_i.transpose() * pi_i + Eigen::Matrix3d::Identity();
            const Eigen::MatrixXd rhs =
                c * pi_i.transpose() * state.w.frame(i) +
                state.r_p[i].transpose() *
                    (state.s_tilde.frame(i) + state.y3.middleRows(3 * i, 3) / state.beta);
            out.middleRows(3 * i, 3) = lhs.ldlt().solve(rhs);
        }
        return ShapeSequence(std::move(out), ShapeCoord::Camera);
    }

    const Eigen::MatrixXd t = translation_matrix(p);
    const Eigen::MatrixXd t2 = t * t;
    for (int i = 0; i < f; ++i) {
        const Eigen::Matrix<double, 2, 3>& pi_i = state.pi[i];
        const Eigen::Matrix3d ptp = pi_i.transpose() * pi_i;

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * p, 3 * p);
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l)
                a.block<3, 3>(3 * j, 3 * l) = t2(j, l) * Eigen::Matrix3d::Identity();
        for (int j = 0; j < p; ++j)
            if (state.mask->visible(i, j)) a.block<3, 3>(3 * j, 3 * j) += c * ptp;

        Eigen::MatrixXd w_masked = state.w.frame(i);
        for (int j = 0; j < p; ++j)
            if (!state.mask->visible(i, j)) w_masked.col(j).setZero();
        const Eigen::MatrixXd rhs_mat =
            c * pi_i.transpose() * w_masked +
            state.r_p[i].transpose() *
                (state.s_tilde.frame(i) + state.y3.middleRows(3 * i, 3) / state.beta) * t;

        const double ridge = 1e-11 * (1.0 + a.trace() / (3 * p));
        a.diagonal().array() += ridge;
        const Eigen::Map<const Eigen::VectorXd> rhs_vec(rhs_mat.data(), 3 * p);
        const Eigen::VectorXd sol = a.ldlt().solve(rhs_vec);
        out.middleRows(3 * i, 3) =
            Eigen::Map<const Eigen::MatrixXd>(sol.data(), 3, p);
    }
    return ShapeSequence(std::move(out), ShapeCoord::Camera);
}

namespace detail {

/* Gradient of the Q_i-restricted Lagrangian under the update
 * Q_i <- exp(phi) Q_i: sum_j skew(Q_i s~_ij)^T [mu3 (r1 - r0) + beta r_hat
 * + Y_2], with the single-residual forms at the boundary frames. */
inline Eigen::Vector3d q_gradient_frame(const RotationSequence& q,
                                        const SolverState& state, const SolverConfig& cfg,
                                        int i) {
    const int p = state.points();
    const Eigen::MatrixXd qs = q[i] * state.s_tilde.frame(i);
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (int j = 0; j < p; ++j) {
        Eigen::Vector3d rho = Eigen::Vector3d::Zero();
        if (i > 0)
            rho += cfg.mu3 * (q[i - 1] * state.s_tilde.frame(i - 1).col(j) - qs.col(j));
        if (i + 1 < state.frames())
            rho -= cfg.mu3 * (qs.col(j) - q[i + 1] * state.s_tilde.frame(i + 1).col(j));
        rho += state.beta * (state.s_hat.frame(i).col(j) - qs.col(j));
        rho += state.y2.middleRows(3 * i, 3).col(j);
        grad += skew(qs.col(j)).transpose() * rho;
    }
    return grad;
}

/* Part of the Lagrangian that depends on Q_i. */
inline double q_local_objective(const RotationSequence& q, const SolverState& state,
                                const SolverConfig& cfg, int i) {
    const Eigen::MatrixXd qs = q[i] * state.s_tilde.frame(i);
    double obj = 0.0;
    if (i > 0)
        obj += 0.5 * cfg.mu3 *
               (q[i - 1] * state.s_tilde.frame(i - 1) - qs).squaredNorm();
    if (i + 1 < state.frames())
        obj += 0.5 * cfg.mu3 *
               (qs - q[i + 1] * state.s_tilde.frame(i + 1)).squaredNorm();
    const Eigen::MatrixXd r_hat = state.s_hat.frame(i) - qs;
    obj += 0.5 * state.beta * r_hat.squaredNorm();
    obj += (state.y2.middleRows(3 * i, 3).cwiseProduct(r_hat)).sum();
    return obj;
}

inline bool q_lm_frame_step(RotationSequence& q, const SolverState& state,
                            const SolverConfig& cfg, int i) {
    const int p = state.points();
    const double neighbours = (i > 0 ? 1.0 : 0.0) + (i + 1 < state.frames() ? 1.0 : 0.0);
    const double curvature_scale = neighbours * cfg.mu3 + state.beta;

    bool any_accepted = false;
    double damping = 1e-3;
    int consecutive_rejects = 0;
    for (int it = 0; it < 10; ++it) {
        const Eigen::Vector3d grad = q_gradient_frame(q, state, cfg, i);
        if (grad.norm() < 1e-12 * (1.0 + state.beta)) break;

        Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
        const Eigen::MatrixXd qs = q[i] * state.s_tilde.frame(i);
        for (int j = 0; j < p; ++j) {
            const Eigen::Matrix3d k = skew(qs.col(j));
            hess += k.transpose() * k;
        }
        hess *= curvature_scale;

        const double before = q_local_objective(q, state, cfg, i);
        const Eigen::Vector3d step =
            (hess + damping * Eigen::Matrix3d::Identity()).ldlt().solve(-grad);
        const Eigen::Matrix3d backup = q[i];
        q[i] = project_to_so3(exp_so3(step) * q[i]);
        if (q_local_objective(q, state, cfg, i) < before) {
            damping *= 0.1;
            any_accepted = true;
            consecutive_rejects = 0;
        } else {
            q[i] = backup;
            damping *= 10.0;
            if (++consecutive_rejects >= 3) break;
        }
    }
    return any_accepted;
}

}  // namespace detail

/* Gradient of the Q-restricted Lagrangian at frame i, evaluated at the
 * state's current rotations. */
inline Eigen::Vector3d q_augmented_gradient(const SolverState& state,
                                            const SolverConfig& cfg, int i) {
    return detail::q_gradient_frame(state.q, state, cfg, i);
}

/* Frame-sweep LM refinement of the correction rotations, capped at
 * q_inner_iters forward+backward sweeps. Accepted steps never increase the
 * Lagrangian; rotations are re-projected to SO(3). */
inline RotationSequence update_q(const SolverState& state, const SolverConfig& cfg) {
    RotationSequence q = state.q;
    for (int sweep = 0; sweep < cfg.q_inner_iters; ++sweep) {
        for (int i = 0; i < state.frames(); ++i)
            detail::q_lm_frame_step(q, state, cfg, i);
        for (int i = state.frames() - 1; i >= 0; --i)
            detail::q_lm_frame_step(q, state, cfg, i);
    }
    return q;
}

/* Dual ascent plus penalty growth:
 * Y_1 += beta (S_breve^sharp - g(S_hat Lambda)), Y_2 += beta (S_hat - Q S_tilde),
 * Y_3 += beta (S_tilde - R_p S (T)), beta <- min(beta_max, lambda beta). */
inline void update_multipliers_and_beta(SolverState& state, const SolverConfig& cfg) {
    state.y1 += state.beta * (state.s_breve_sharp.s_sharp - detail::rearranged_proxy(state));
    state.y2 += state.beta * (state.s_hat.s - detail::apply_q(state, state.s_tilde.s));
    state.y3 += state.beta * (state.s_tilde.s - detail::rp_s_link(state));
    state.beta = std::min(cfg.beta_max, cfg.lambda_growth * state.beta);
}

/* Full augmented Lagrangian (masked data term when the occluded model is
 * active). */
inline double lagrangian_value(const SolverState& state, const SolverConfig& cfg) {
    double value = 0.0;
    for (int i = 0; i < state.frames(); ++i) {
        Eigen::MatrixXd res = state.w.frame(i) - state.pi[i] * state.s.frame(i);
        if (state.mask)
            for (int j = 0; j < state.points(); ++j)
                if (!state.mask->visible(i, j)) res.col(j).setZero();
        value += 0.5 * cfg.mu1 * res.squaredNorm();
    }
    value += cfg.mu2 * state.s_breve_sharp.s_sharp.jacobiSvd().singularValues().sum();

    const Eigen::MatrixXd q_s_tilde = detail::apply_q(state, state.s_tilde.s);
    for (int i = 0; i + 1 < state.frames(); ++i)
        value += 0.5 * cfg.mu3 *
                 (q_s_tilde.middleRows(3 * i, 3) - q_s_tilde.middleRows(3 * (i + 1), 3))
                     .squaredNorm();

    const Eigen::MatrixXd r1 = state.s_breve_sharp.s_sharp - detail::rearranged_proxy(state);
    const Eigen::MatrixXd r2 = state.s_hat.s - q_s_tilde;
    const Eigen::MatrixXd r3 = state.s_tilde.s - detail::rp_s_link(state);
    value += 0.5 * state.beta * r1.squaredNorm() + state.y1.cwiseProduct(r1).sum();
    value += 0.5 * state.beta * r2.squaredNorm() + state.y2.cwiseProduct(r2).sum();
    value += 0.5 * state.beta * r3.squaredNorm() + state.y3.cwiseProduct(r3).sum();
    return value;
}

struct SolveResult {
    ShapeSequence s;      // camera coordinates, measurement scale restored
    ShapeSequence s_hat;  // canonical reconstruction, the sequence to evaluate
    RotationSequence q;
    SolverDiagnostics diagnostics;
    bool converged = false;
    double scale = 1.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline bool run_admm_phase(SolverState& state, const SolverConfig& cfg, bool enable_q,
                           int max_iters, SolverDiagnostics& diag, int& iters_done) {
    bool converged = false;
    iters_done = 0;
    for (int it = 0; it < max_iters; ++it) {
        ++iters_done;
        state.s_breve_sharp = update_proxy_sharp(state, cfg);
        state.s_hat = update_s_hat(state, cfg);
        state.s_tilde = update_s_tilde(state, cfg);
        ShapeSequence s_new = update_s(state, cfg);
        const double change = (s_new.s - state.s.s).cwiseAbs().maxCoeff();
        state.s = std::move(s_new);
        if (enable_q) state.q = update_q(state, cfg);

        SolverDiagnosticsRow row;
        row.iteration = static_cast<int>(diag.rows.size()) + 1;
        row.reprojection_error = reprojection_error(
            state.w, state.pi, state.s, state.mask ? &*state.mask : nullptr);
        row.lagrangian = lagrangian_value(state, cfg);
        row.r1 = (state.s_breve_sharp.s_sharp - rearranged_proxy(state)).norm();
        row.r2 = (state.s_hat.s - apply_q(state, state.s_tilde.s)).norm();
        row.r3 = (state.s_tilde.s - rp_s_link(state)).norm();
        row.beta = state.beta;
        diag.rows.push_back(row);

        update_multipliers_and_beta(state, cfg);
        if (change < cfg.eps) {
            converged = true;
            break;
        }
    }
    return converged;
}

inline SolveResult solve_impl(const MeasurementMatrix& w_in,
                              const RotationSequence& camera_rotations,
                              const SolverConfig& cfg, const VisibilityMask* mask) {
    if (camera_rotations.frames() != w_in.frames())
        throw std::invalid_argument("solve: rotation/measurement frame counts differ");
    for (int i = 0; i < camera_rotations.frames(); ++i)
        if (!is_rotation(camera_rotations[i], 1e-6))
            throw std::invalid_argument("solve: initialization rotation " +
                                        std::to_string(i + 1) + " is not in SO(3)");

    SolveResult result;
    if (mask) {
        mask->validate();
        if (mask->frames() != w_in.frames() || mask->points() != w_in.points())
            throw std::invalid_argument("solve: mask dimensions mismatch");
        for (int i = 0; i < mask->frames(); ++i)
            if (mask->visible_in_frame(i) < 3)
                result.warnings.push_back("frame " + std::to_string(i + 1) +
                                          " has fewer than 3 visible points");
    }

    const NormalizedMeasurements norm = normalize_scale(w_in);
    const int f = w_in.frames();

    SolverState state;
    state.w = norm.w;
    if (mask) state.mask = *mask;
    state.pi = CameraPath::identity(f);
    std::vector<Eigen::Matrix3d> rp(f);
    for (int i = 0; i < f; ++i) rp[i] = camera_rotations[i].transpose();
    state.r_p = RotationSequence(std::move(rp));
    state.q = RotationSequence::identity(f);

    // Identity kernel for phase 1.
    state.lam.lambda = Eigen::MatrixXd::Identity(w_in.points(), w_in.points());
    state.lam.delta_r = 0.0;
    state.lam.delta_nr = 0.0;
    state.lam.rigid_set.resize(w_in.points());
    std::iota(state.lam.rigid_set.begin(), state.lam.rigid_set.end(), 0);

    state.s = init_shape_pinv(state.w, RotationSequence::identity(f));
    {
        Eigen::MatrixXd st = rp_s_link(state);
        state.s_tilde = ShapeSequence(st, ShapeCoord::Aligned);
        state.s_hat = ShapeSequence(std::move(st), ShapeCoord::Canonical);
    }
    state.s_breve_sharp = RearrangedShape(rearranged_proxy(state));
    state.y1 = Eigen::MatrixXd::Zero(f, 3 * w_in.points());
    state.y2 = Eigen::MatrixXd::Zero(3 * f, w_in.points());
    state.y3 = Eigen::MatrixXd::Zero(3 * f, w_in.points());
    state.beta = cfg.beta0;

    result.diagnostics.phase1_converged = run_admm_phase(
        state, cfg, /*enable_q=*/false, cfg.max_iters, result.diagnostics,
        result.diagnostics.phase1_iters);

    if (cfg.run_phase2) {
        const SegmentationResult seg =
            segment_nearly_rigid(state.s_hat, cfg.alpha_r, cfg.m_f);
        ProxyConfig proxy_cfg;
        proxy_cfg.alpha_r = cfg.alpha_r;
        proxy_cfg.delta_r = cfg.delta_r;
        proxy_cfg.m_f = cfg.m_f;
        state.lam = build_weight_matrix(seg, proxy_cfg);
        state.beta = cfg.beta_d;

        result.diagnostics.phase2_converged = run_admm_phase(
            state, cfg, cfg.enable_q_update, cfg.max_iters, result.diagnostics,
            result.diagnostics.phase2_iters);
        result.converged = result.diagnostics.phase1_converged &&
                           result.diagnostics.phase2_converged;
    } else {
        result.converged = result.diagnostics.phase1_converged;
    }

    result.s = ShapeSequence(norm.scale * state.s.s, ShapeCoord::Camera);
    result.s_hat = ShapeSequence(norm.scale * state.s_hat.s, ShapeCoord::Canonical);
    result.q = state.q;
    result.scale = norm.scale;
    return result;
}

}  // namespace detail

/* Two-phase ADMM. Phase 1 runs with Q frozen at the identity and an
 * identity kernel; afterwards the nearly rigid segmentation builds the
 * spatial weight matrix, beta restarts at beta_d, and phase 2 runs the
 * full model. `camera_rotations` are per-frame camera rotations (first two
 * rows project), e.g. from init_rotations or a rotation file. */
inline SolveResult solve(const MeasurementMatrix& w, const RotationSequence& camera_rotations,
                         const SolverConfig& cfg = {},
                         const VisibilityMask* mask = nullptr) {
    return detail::solve_impl(w, camera_rotations, cfg, mask);
}

/* Occluded variant: masked data term, shapes recentered inside the
 * alignment link, per-frame 3P x 3P camera-shape systems. */
inline SolveResult solve_occluded(const MeasurementMatrix& w,
                                  const RotationSequence& camera_rotations,
                                  const SolverConfig& cfg, const VisibilityMask& mask) {
    return detail::solve_impl(w, camera_rotations, cfg, &mask);
}

}  // namespace nrsfm

#endif  // NRSFM_SOLVER_HPP
