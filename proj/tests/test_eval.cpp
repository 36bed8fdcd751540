#include <doctest.h>

#include <random>

#include "nrsfm/eval.hpp"
#include "test_helpers.hpp"

using namespace nrsfm;

TEST_CASE("e3d basics") {
    std::mt19937_64 rng(151);
    const ShapeSequence gt = test::random_shape_sequence(rng, 6, 9);

    CHECK(e3d(gt, gt).e3d < 1e-14);

    // one global rotation of the estimate is removed
    const Eigen::Matrix3d g = test::random_rotation(rng);
    Eigen::MatrixXd rotated(gt.s.rows(), gt.s.cols());
    for (int i = 0; i < gt.frames(); ++i) rotated.middleRows(3 * i, 3) = g * gt.frame(i);
    const EvalReport rot_report = e3d(ShapeSequence(rotated), gt);
    CHECK(rot_report.e3d < 1e-10);

    // scale differences are NOT removed: est = 2 gt has error exactly 1
    const EvalReport scale_report = e3d(ShapeSequence(2.0 * gt.s), gt);
    CHECK(scale_report.e3d == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("e3d removes a global depth flip") {
    std::mt19937_64 rng(157);
    const ShapeSequence gt = test::random_shape_sequence(rng, 5, 8);
    Eigen::MatrixXd flipped = gt.s;
    for (int i = 0; i < 5; ++i) flipped.row(3 * i + 2) *= -1.0;
    const EvalReport report = e3d(ShapeSequence(flipped), gt);
    CHECK(report.e3d < 1e-10);
    CHECK(report.flip_used);
}

TEST_CASE("e3d names a zero-norm ground-truth frame") {
    std::mt19937_64 rng(163);
    ShapeSequence gt = test::random_shape_sequence(rng, 4, 6);
    gt.s.middleRows(6, 3).setZero();  // frame 3 degenerate after centering
    const ShapeSequence est = test::random_shape_sequence(rng, 4, 6);
    CHECK_THROWS_WITH_AS(e3d(est, gt), doctest::Contains("frame 3"),
                         std::invalid_argument);
}

TEST_CASE("e3d report bookkeeping") {
    std::mt19937_64 rng(167);
    const ShapeSequence gt = test::random_shape_sequence(rng, 5, 7);
    const ShapeSequence est = test::random_shape_sequence(rng, 5, 7);
    const EvalReport report = e3d(est, gt);
    CHECK(report.per_frame_errors.size() == 5);
    CHECK(report.e3d == doctest::Approx(report.per_frame_errors.mean()).epsilon(1e-12));
    CHECK(report.e3d >= 0.0);
    CHECK(is_rotation(report.aligning_rotation, 1e-9));
}

TEST_CASE("nuclear_norm_diag") {
    CHECK(nuclear_norm_diag(ShapeSequence(Eigen::MatrixXd::Zero(9, 4))) == 0.0);

    // rank-1 rearranged sequence: the norm is the Frobenius norm
    std::mt19937_64 rng(173);
    const Eigen::MatrixXd row = test::random_matrix(rng, 1, 12);
    Eigen::MatrixXd sharp(4, 12);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 4; ++i) sharp.row(i) = gauss(rng) * row;
    const ShapeSequence s = inverse_rearrange(RearrangedShape(sharp));
    CHECK(nuclear_norm_diag(s) == doctest::Approx(sharp.norm()).epsilon(1e-12));

    // eigenvalue oracle: sum of sqrt eigenvalues of X^T X (eigenvalues at
    // the numerical-noise floor are clamped before the sqrt)
    const ShapeSequence rand_s = test::random_shape_sequence(rng, 5, 6);
    const Eigen::MatrixXd x = rearrange(rand_s).s_sharp;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x);
    const double floor = 1e-12 * eig.eigenvalues().maxCoeff();
    double expected = 0;
    for (int i = 0; i < eig.eigenvalues().size(); ++i)
        if (eig.eigenvalues()(i) > floor) expected += std::sqrt(eig.eigenvalues()(i));
    CHECK(nuclear_norm_diag(rand_s) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("smoothness_diag") {
    std::mt19937_64 rng(179);
    const Eigen::MatrixXd frame = test::random_matrix(rng, 3, 6);
    CHECK(smoothness_diag(ShapeSequence(frame.replicate(5, 1))) == 0.0);

    const Eigen::MatrixXd diff = test::random_matrix(rng, 3, 6);
    Eigen::MatrixXd two(6, 6);
    two << frame, frame + diff;
    CHECK(smoothness_diag(ShapeSequence(two)) ==
          doctest::Approx(diff.squaredNorm()).epsilon(1e-12));

    const ShapeSequence s = test::random_shape_sequence(rng, 7, 5);
    double direct = 0;
    for (int i = 0; i + 1 < 7; ++i) direct += (s.frame(i + 1) - s.frame(i)).squaredNorm();
    CHECK(smoothness_diag(s) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("reprojection_error") {
    std::mt19937_64 rng(181);
    const ShapeSequence s = test::random_shape_sequence(rng, 6, 8);
    const RotationSequence rots = test::random_rotation_sequence(rng, 6);
    const CameraPath pi = CameraPath::from_rotations(rots);
    const MeasurementMatrix w = pi.project(s);

    CHECK(reprojection_error(w, pi, s) < 1e-14);
    CHECK(reprojection_error(w, pi, ShapeSequence(Eigen::MatrixXd::Zero(18, 8))) ==
          doctest::Approx(1.0));

    // direct arithmetic oracle on a random estimate
    const ShapeSequence est = test::random_shape_sequence(rng, 6, 8);
    double num = 0, den = 0;
    for (int i = 0; i < 6; ++i) {
        num += (w.frame(i) - pi[i] * est.frame(i)).squaredNorm();
        den += w.frame(i).squaredNorm();
    }
    CHECK(reprojection_error(w, pi, est) ==
          doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
}

TEST_CASE("nuclear norm is invariant to a shared rotation but not per-frame ones") {
    std::mt19937_64 rng(191);
    const ShapeSequence s = test::random_shape_sequence(rng, 6, 10);
    const double base = nuclear_norm_diag(s);

    const Eigen::Matrix3d g = test::random_rotation(rng);
    Eigen::MatrixXd shared(s.s.rows(), s.s.cols());
    for (int i = 0; i < 6; ++i) shared.middleRows(3 * i, 3) = g * s.frame(i);
    CHECK(nuclear_norm_diag(ShapeSequence(shared)) == doctest::Approx(base).epsilon(1e-10));

    Eigen::MatrixXd per_frame(s.s.rows(), s.s.cols());
    for (int i = 0; i < 6; ++i)
        per_frame.middleRows(3 * i, 3) = test::random_rotation(rng) * s.frame(i);
    CHECK(std::abs(nuclear_norm_diag(ShapeSequence(per_frame)) - base) > 1e-6);
}
