/* types.hpp -- sequence containers shared across the library */

#ifndef NRSFM_TYPES_HPP
#define NRSFM_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nrsfm {

/* Raised when an input configuration is too degenerate to process
 * (rank-deficient point sets, unsatisfiable occlusion rates, ...). */
class DegenerateConfiguration : public std::runtime_error {
public:
    explicit DegenerateConfiguration(const std::string& msg)
        : std::runtime_error(msg) {}
};

/* Stacked 2D tracks, 2F x P. Rows 2i, 2i+1 hold the x and y image
 * coordinates of frame i. */
struct MeasurementMatrix {
    Eigen::MatrixXd w;

    MeasurementMatrix() = default;
    explicit MeasurementMatrix(Eigen::MatrixXd m) : w(std::move(m)) {
        if (w.rows() % 2 != 0)
            throw std::invalid_argument("MeasurementMatrix: row count must be even");
    }

    int frames() const { return static_cast<int>(w.rows()) / 2; }
    int points() const { return static_cast<int>(w.cols()); }

    auto frame(int i) { return w.middleRows(2 * i, 2); }
    auto frame(int i) const { return w.middleRows(2 * i, 2); }
};

/* Coordinate role of a shape sequence. */
enum class ShapeCoord { Camera, Aligned, Canonical, Proxy };

/* Stacked 3D shapes, 3F x P. Rows 3i..3i+2 hold the x, y, z rows of
 * frame i. */
struct ShapeSequence {
    Eigen::MatrixXd s;
    ShapeCoord coord = ShapeCoord::Camera;

    ShapeSequence() = default;
    explicit ShapeSequence(Eigen::MatrixXd m, ShapeCoord c = ShapeCoord::Camera)
        : s(std::move(m)), coord(c) {
        if (s.rows() % 3 != 0)
            throw std::invalid_argument("ShapeSequence: row count must be a multiple of 3");
    }

    int frames() const { return static_cast<int>(s.rows()) / 3; }
    int points() const { return static_cast<int>(s.cols()); }

    auto frame(int i) { return s.middleRows(3 * i, 3); }
    auto frame(int i) const { return s.middleRows(3 * i, 3); }
};

/* A shape sequence reshuffled to F x 3P, one frame per row. Row i is
 * [x_i | y_i | z_i], the concatenated coordinate rows of frame i. */
struct RearrangedShape {
    Eigen::MatrixXd s_sharp;

    RearrangedShape() = default;
    explicit RearrangedShape(Eigen::MatrixXd m) : s_sharp(std::move(m)) {
        if (s_sharp.cols() % 3 != 0)
            throw std::invalid_argument("RearrangedShape: column count must be a multiple of 3");
    }

    int frames() const { return static_cast<int>(s_sharp.rows()); }
    int points() const { return static_cast<int>(s_sharp.cols()) / 3; }
};

/* Per-frame point visibility, F x P with entries in {0, 1}. */
struct VisibilityMask {
    Eigen::MatrixXi o;

    VisibilityMask() = default;
    explicit VisibilityMask(Eigen::MatrixXi m) : o(std::move(m)) {}

    int frames() const { return static_cast<int>(o.rows()); }
    int points() const { return static_cast<int>(o.cols()); }

    bool visible(int frame, int point) const { return o(frame, point) != 0; }
    int visible_in_frame(int frame) const { return o.row(frame).sum(); }

    /* Entries must be 0/1 and every frame needs at least one visible point. */
    void validate() const {
        for (int i = 0; i < o.rows(); ++i) {
            for (int j = 0; j < o.cols(); ++j)
                if (o(i, j) != 0 && o(i, j) != 1)
                    throw std::invalid_argument(
                        "VisibilityMask: entry at frame " + std::to_string(i + 1) +
                        ", point " + std::to_string(j + 1) + " is not 0/1");
            if (o.row(i).sum() < 1)
                throw std::invalid_argument(
                    "VisibilityMask: frame " + std::to_string(i + 1) + " has no visible points");
        }
    }

    static VisibilityMask all_visible(int frames, int points) {
        return VisibilityMask(Eigen::MatrixXi::Ones(frames, points));
    }
};

/* Ordered list of F rotations. */
struct RotationSequence {
    std::vector<Eigen::Matrix3d> rots;

    RotationSequence() = default;
    explicit RotationSequence(std::vector<Eigen::Matrix3d> r) : rots(std::move(r)) {}

    static RotationSequence identity(int frames) {
        return RotationSequence(
            std::vector<Eigen::Matrix3d>(frames, Eigen::Matrix3d::Identity()));
    }

    int frames() const { return static_cast<int>(rots.size()); }
    Eigen::Matrix3d& operator[](int i) { return rots[i]; }
    const Eigen::Matrix3d& operator[](int i) const { return rots[i]; }

    /* Block-diagonal application: frame i of the result is rots[i] * frame i. */
    ShapeSequence apply(const ShapeSequence& s, ShapeCoord coord) const {
        if (static_cast<int>(rots.size()) != s.frames())
            throw std::invalid_argument("RotationSequence::apply: frame count mismatch");
        Eigen::MatrixXd out(s.s.rows(), s.s.cols());
        for (int i = 0; i < s.frames(); ++i)
            out.middleRows(3 * i, 3) = rots[i] * s.frame(i);
        return ShapeSequence(std::move(out), coord);
    }

    /* Same with each rotation transposed. */
    ShapeSequence apply_transposed(const ShapeSequence& s, ShapeCoord coord) const {
        if (static_cast<int>(rots.size()) != s.frames())
            throw std::invalid_argument("RotationSequence::apply_transposed: frame count mismatch");
        Eigen::MatrixXd out(s.s.rows(), s.s.cols());
        for (int i = 0; i < s.frames(); ++i)
            out.middleRows(3 * i, 3) = rots[i].transpose() * s.frame(i);
        return ShapeSequence(std::move(out), coord);
    }
};

/* F orthographic projectors, each the first two rows of a rotation. */
struct CameraPath {
    std::vector<Eigen::Matrix<double, 2, 3>> pi;

    CameraPath() = default;
    explicit CameraPath(std::vector<Eigen::Matrix<double, 2, 3>> p) : pi(std::move(p)) {}

    /* Projectors of a rotation sequence: frame i projects with the first
     * two rows of rots[i]. */
    static CameraPath from_rotations(const RotationSequence& rots) {
        std::vector<Eigen::Matrix<double, 2, 3>> p(rots.frames());
        for (int i = 0; i < rots.frames(); ++i) p[i] = rots[i].topRows<2>();
        return CameraPath(std::move(p));
    }

    /* [I2 | 0] per frame, the projector for camera-frame shapes. */
    static CameraPath identity(int frames) {
        Eigen::Matrix<double, 2, 3> id;
        id << 1, 0, 0, 0, 1, 0;
        return CameraPath(std::vector<Eigen::Matrix<double, 2, 3>>(frames, id));
    }

    int frames() const { return static_cast<int>(pi.size()); }
    Eigen::Matrix<double, 2, 3>& operator[](int i) { return pi[i]; }
    const Eigen::Matrix<double, 2, 3>& operator[](int i) const { return pi[i]; }

    /* Frame-wise projection W_i = pi_i * S_i. */
    MeasurementMatrix project(const ShapeSequence& s) const {
        if (frames() != s.frames())
            throw std::invalid_argument("CameraPath::project: frame count mismatch");
        Eigen::MatrixXd w(2 * frames(), s.points());
        for (int i = 0; i < frames(); ++i)
            w.middleRows(2 * i, 2) = pi[i] * s.frame(i);
        return MeasurementMatrix(std::move(w));
    }
};

}  // namespace nrsfm

#endif  // NRSFM_TYPES_HPP
