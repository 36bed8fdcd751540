/* synth.hpp -- seeded synthetic ground truth: basis-built deforming
 * sequences, three camera-motion regimes, rotation disruption, occlusion
 * and 2D noise injection. */

#ifndef NRSFM_SYNTH_HPP
#define NRSFM_SYNTH_HPP

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrsfm/geometry.hpp"
#include "nrsfm/seqdata.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

enum class CameraType { Fixed, OneCircle, MultiCircle };

enum class OcclusionPattern { UniformRandom, PerFrameBlock };

struct SynthSpec {
    int frames = 50;
    int points = 30;
    int basis = 3;
    CameraType camera_type = CameraType::OneCircle;
    int coeff_band = 5;  // number of low DCT atoms driving the coefficients
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    double occlusion_rate = 0.0;
};

struct SynthResult {
    ShapeSequence s_gt;     // world coordinates, per-frame centroid removed
    RotationSequence r_gt;  // camera rotations; first two rows project
    MeasurementMatrix w;    // centralized 2D tracks
};

namespace detail {

inline Eigen::Vector3d gaussian3(std::mt19937_64& rng, std::normal_distribution<double>& n) {
    return Eigen::Vector3d(n(rng), n(rng), n(rng));
}

}  // namespace detail

/* Deforming sequence S_i = sum_j c_ij B_j with orthonormal random bases and
 * band-limited DCT coefficients; the camera path spins about the world
 * z-axis (one-circle: 360/F deg per frame, multi-circle: 5 deg per frame)
 * behind a seeded constant tilt. */
inline SynthResult generate_sequence(const SynthSpec& spec) {
    if (spec.basis > std::min(spec.frames, spec.points))
        throw std::invalid_argument("generate_sequence: K must not exceed min(F, P)");
    if (spec.basis < 1 || spec.frames < 1 || spec.points < 1)
        throw std::invalid_argument("generate_sequence: invalid dimensions");
    if (spec.coeff_band < 1 || spec.coeff_band > spec.frames)
        throw std::invalid_argument("generate_sequence: coeff_band out of range");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int f = spec.frames, p = spec.points, k = spec.basis;

    // Orthonormal centered bases, Gram-Schmidt over R^{3P}.
    std::vector<Eigen::MatrixXd> bases(k);
    const Eigen::MatrixXd t = translation_matrix(p);
    for (int j = 0; j < k; ++j) {
        Eigen::MatrixXd b(3, p);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < p; ++c) b(r, c) = gauss(rng);
        b = b * t;  // zero centroid
        for (int prev = 0; prev < j; ++prev)
            b -= (b.cwiseProduct(bases[prev]).sum()) * bases[prev];
        const double norm = b.norm();
        if (norm < 1e-12)
            throw DegenerateConfiguration("generate_sequence: degenerate basis draw");
        bases[j] = b / norm;
    }

    // Smooth coefficients from the first coeff_band DCT atoms.
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(f, k);
    for (int j = 0; j < k; ++j) {
        for (int b = 0; b < spec.coeff_band; ++b) {
            const double amp = gauss(rng);
            for (int i = 0; i < f; ++i)
                coeffs(i, j) += amp * std::cos(M_PI * b * (2.0 * i + 1.0) / (2.0 * f));
        }
    }

    Eigen::MatrixXd s(3 * f, p);
    for (int i = 0; i < f; ++i) {
        Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(3, p);
        for (int j = 0; j < k; ++j) frame += coeffs(i, j) * bases[j];
        s.middleRows(3 * i, 3) = frame;
    }

    // Canonicalize: a raw basis combination carries frame-to-frame rigid
    // motion, which belongs to the camera path, not to a canonical ground
    // truth. Alternate a sequential Procrustes de-rotation pass with a
    // rank-K projection in the rearranged domain until the sequence is
    // both rigid-motion-free and exactly rank K.
    for (int round = 0; round < 300; ++round) {
        double max_angle = 0.0;
        for (int i = 1; i < f; ++i) {
            const Eigen::Matrix3d r = procrustes_rotation(
                s.middleRows(3 * i, 3), s.middleRows(3 * (i - 1), 3));
            max_angle = std::max(max_angle, log_so3(r).norm());
            s.middleRows(3 * i, 3) = r * s.middleRows(3 * i, 3);
        }
        if (max_angle < 1e-10 && round > 0) break;
        Eigen::MatrixXd x = rearrange(ShapeSequence(s)).s_sharp;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(x,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd sv = svd.singularValues();
        for (int j = k; j < sv.size(); ++j) sv(j) = 0;
        x = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
        s = inverse_rearrange(RearrangedShape(x)).s;
    }

    // Camera path: seeded constant tilt, then a per-frame spin about the
    // ground-vertical (z) axis.
    const Eigen::Matrix3d tilt = exp_so3(0.5 * detail::gaussian3(rng, gauss));
    double step = 0.0;
    if (spec.camera_type == CameraType::OneCircle) step = 2.0 * M_PI / f;
    if (spec.camera_type == CameraType::MultiCircle) step = 5.0 * M_PI / 180.0;

    std::vector<Eigen::Matrix3d> rots(f);
    for (int i = 0; i < f; ++i)
        rots[i] = tilt * exp_so3(Eigen::Vector3d(0, 0, step * i));

    SynthResult out;
    out.s_gt = ShapeSequence(std::move(s), ShapeCoord::Canonical);
    out.r_gt = RotationSequence(std::move(rots));
    out.w = centralize(CameraPath::from_rotations(out.r_gt).project(
        out.r_gt.apply(out.s_gt, ShapeCoord::Camera)));
    return out;
}

/* Left-multiply every frame by a random rotation with N(0, sigma^2)
 * Lie-algebra coordinates. */
inline ShapeSequence disrupt_rotations(const ShapeSequence& s, double sigma,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd out(s.s.rows(), s.s.cols());
    for (int i = 0; i < s.frames(); ++i) {
        const Eigen::Matrix3d d = exp_so3(sigma * detail::gaussian3(rng, gauss));
        out.middleRows(3 * i, 3) = d * s.frame(i);
    }
    return ShapeSequence(std::move(out), s.coord);
}

/* Same disruption applied to a rotation sequence (noisy initializations). */
inline RotationSequence disrupt_rotation_sequence(const RotationSequence& rots,
                                                  double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::Matrix3d> out(rots.frames());
    for (int i = 0; i < rots.frames(); ++i)
        out[i] = exp_so3(sigma * detail::gaussian3(rng, gauss)) * rots[i];
    return RotationSequence(std::move(out));
}

/* Visibility mask hiding round(rate * F * P) cells. Every frame keeps at
 * least 3 visible points (rejection-resampled); an unsatisfiable rate
 * throws. */
inline VisibilityMask inject_occlusion(int frames, int points, double rate,
                                       OcclusionPattern pattern, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("inject_occlusion: rate must be in [0, 1)");
    const int total = frames * points;
    const int target = static_cast<int>(std::floor(rate * total + 0.5));
    const int floor_visible = 3;
    if (target > frames * (points - floor_visible))
        throw DegenerateConfiguration(
            "inject_occlusion: rate " + std::to_string(rate) +
            " cannot keep 3 visible points per frame");

    std::mt19937_64 rng(seed);
    Eigen::MatrixXi o = Eigen::MatrixXi::Ones(frames, points);

    if (pattern == OcclusionPattern::UniformRandom) {
        std::vector<int> cells(total);
        std::iota(cells.begin(), cells.end(), 0);
        for (int attempt = 0; attempt < 10000; ++attempt) {
            o.setOnes();
            // Partial Fisher-Yates draw of `target` distinct cells.
            for (int i = 0; i < target; ++i) {
                std::uniform_int_distribution<int> pick(i, total - 1);
                std::swap(cells[i], cells[pick(rng)]);
                o(cells[i] / points, cells[i] % points) = 0;
            }
            bool ok = true;
            for (int i = 0; i < frames && ok; ++i)
                if (o.row(i).sum() < floor_visible) ok = false;
            if (ok) return VisibilityMask(std::move(o));
        }
        throw DegenerateConfiguration(
            "inject_occlusion: could not satisfy the per-frame visibility floor");
    }

    // Per-frame contiguous blocks; lengths distributed so the total count
    // is exact.
    const int base = target / frames;
    const int extra = target % frames;
    if (base + 1 > points - floor_visible && extra > 0)
        throw DegenerateConfiguration(
            "inject_occlusion: block pattern cannot keep 3 visible points per frame");
    for (int i = 0; i < frames; ++i) {
        const int len = base + (i < extra ? 1 : 0);
        if (len == 0) continue;
        std::uniform_int_distribution<int> start_pick(0, points - len);
        const int start = start_pick(rng);
        for (int j = start; j < start + len; ++j) o(i, j) = 0;
    }
    return VisibilityMask(std::move(o));
}

/* i.i.d. Gaussian noise on visible cells. */
inline MeasurementMatrix add_2d_noise(const MeasurementMatrix& w, double sigma_px,
                                      std::uint64_t seed,
                                      const VisibilityMask* mask = nullptr) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd out = w.w;
    if (sigma_px == 0.0) return MeasurementMatrix(std::move(out));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            const double draw = gauss(rng);
            if (mask && !mask->visible(static_cast<int>(i) / 2, static_cast<int>(j)))
                continue;
            out(i, j) += sigma_px * draw;
        }
    return MeasurementMatrix(std::move(out));
}

}  // namespace nrsfm

#endif  // NRSFM_SYNTH_HPP
