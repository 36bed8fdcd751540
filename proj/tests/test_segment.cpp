#include <doctest.h>

#include <random>

#include "nrsfm/segment.hpp"
#include "test_helpers.hpp"

using namespace nrsfm;

namespace {

Eigen::Matrix3Xd cosine_trajectory(int f, int k0, double amplitude = 1.0) {
    Eigen::Matrix3Xd traj = Eigen::Matrix3Xd::Zero(3, f);
    for (int t = 0; t < f; ++t)
        traj(0, t) = amplitude * std::cos(2.0 * M_PI * k0 * (t + 1) / f);
    return traj;
}

}  // namespace

TEST_CASE("constant trajectory has an all-zero periodogram") {
    Eigen::Matrix3Xd traj = Eigen::Matrix3Xd::Zero(3, 20);
    traj.colwise() = Eigen::Vector3d(5.0, -2.0, 11.0);
    const TrajectorySpectrum spec = trajectory_spectrum(traj);
    CHECK(spec.periodogram.maxCoeff() < 1e-24);
}

TEST_CASE("cosine trajectory concentrates on the conjugate bin pair") {
    const TrajectorySpectrum spec = trajectory_spectrum(cosine_trajectory(50, 5));
    for (int k = 0; k < 50; ++k) {
        if (k == 5 || k == 45)
            CHECK(spec.periodogram(k) == doctest::Approx(1.0).epsilon(1e-10));
        else
            CHECK(spec.periodogram(k) < 1e-12);
    }
    CHECK(spec.frequencies(5) == doctest::Approx(0.1));
}

TEST_CASE("Parseval identity") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Matrix3Xd traj =
            test::random_matrix(rng, 3, 16 + trial).topRows(3);
        const TrajectorySpectrum spec = trajectory_spectrum(traj);
        const Eigen::Vector3d mean = traj.rowwise().mean();
        double time_energy = 0;
        for (int t = 0; t < traj.cols(); ++t)
            time_energy += (traj.col(t) - mean).squaredNorm();
        double freq_energy = 0;
        for (int k = 0; k < spec.coeffs.cols(); ++k)
            freq_energy += spec.coeffs.col(k).squaredNorm();
        CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-9));
    }
}

TEST_CASE("deformation_frequency conventions") {
    // all-zero periodogram maps to 0
    const TrajectorySpectrum zero = trajectory_spectrum(Eigen::Matrix3Xd::Zero(3, 10));
    CHECK(deformation_frequency(zero, 2) == 0.0);

    // single cosine: unfolded averages the conjugate pair to 0.5; folded
    // lands on the physical frequency
    const TrajectorySpectrum one = trajectory_spectrum(cosine_trajectory(50, 5));
    CHECK(deformation_frequency(one, 2, /*fold=*/false) == doctest::Approx(0.5));
    CHECK(deformation_frequency(one, 2, /*fold=*/true) == doctest::Approx(0.1));

    // two cosines with distinct amplitudes
    Eigen::Matrix3Xd traj = cosine_trajectory(50, 3, 2.0);
    traj.row(1) = cosine_trajectory(50, 10, 0.5).row(0);
    const TrajectorySpectrum two = trajectory_spectrum(traj);
    CHECK(deformation_frequency(two, 2, /*fold=*/false) ==
          doctest::Approx(0.5));  // (3/50 + 47/50) / 2
    CHECK(deformation_frequency(two, 2, /*fold=*/true) ==
          doctest::Approx(3.0 / 50));
}

TEST_CASE("segment_nearly_rigid splits a two-group construction exactly") {
    std::mt19937_64 rng(107);
    const int f = 50, p = 12;
    Eigen::MatrixXd s(3 * f, p);
    const Eigen::MatrixXd rest = test::random_matrix(rng, 3, p);
    for (int i = 0; i < f; ++i) {
        s.middleRows(3 * i, 3) = rest;
        for (int j = p / 2; j < p; ++j)  // second half oscillates at k0 = 10
            s(3 * i, j) += std::sin(2.0 * M_PI * 10 * (i + 1) / f);
    }
    const SegmentationResult seg = segment_nearly_rigid(ShapeSequence(s), 0.5, 2);
    REQUIRE(static_cast<int>(seg.rigid_set.size()) == p / 2);
    for (int j = 0; j < p / 2; ++j) CHECK(seg.rigid_set[j] == j);
}

TEST_CASE("segment_nearly_rigid trivial and tie-break cases") {
    std::mt19937_64 rng(109);
    const ShapeSequence s = test::random_shape_sequence(rng, 12, 7);

    const SegmentationResult all = segment_nearly_rigid(s, 1.0, 2);
    CHECK(static_cast<int>(all.rigid_set.size()) == 7);

    // identical trajectories tie; the first round(alpha P) indices win
    Eigen::MatrixXd same(3 * 12, 5);
    const Eigen::MatrixXd column = test::random_matrix(rng, 3 * 12, 1);
    for (int j = 0; j < 5; ++j) same.col(j) = column;
    const SegmentationResult tie = segment_nearly_rigid(ShapeSequence(same), 0.5, 2);
    REQUIRE(static_cast<int>(tie.rigid_set.size()) == 3);  // round(2.5) = 3
    CHECK(tie.rigid_set == std::vector<int>{0, 1, 2});
}

TEST_CASE("segmentation size always equals round(alpha_r P)") {
    std::mt19937_64 rng(113);
    const ShapeSequence s = test::random_shape_sequence(rng, 10, 9);
    for (double alpha : {0.1, 0.25, 0.5, 0.77, 1.0}) {
        const SegmentationResult seg = segment_nearly_rigid(s, alpha, 2);
        CHECK(static_cast<int>(seg.rigid_set.size()) ==
              static_cast<int>(std::floor(alpha * 9 + 0.5)));
    }
}

TEST_CASE("deformation frequencies are invariant to a shared global rotation") {
    std::mt19937_64 rng(127);
    const ShapeSequence s = test::random_shape_sequence(rng, 16, 6);
    const Eigen::Matrix3d g = test::random_rotation(rng);
    Eigen::MatrixXd rotated(s.s.rows(), s.s.cols());
    for (int i = 0; i < s.frames(); ++i) rotated.middleRows(3 * i, 3) = g * s.frame(i);

    const SegmentationResult a = segment_nearly_rigid(s, 0.5, 2);
    const SegmentationResult b = segment_nearly_rigid(ShapeSequence(rotated), 0.5, 2);
    CHECK((a.deform_freq - b.deform_freq).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(a.rigid_set == b.rigid_set);
}

TEST_CASE("periodogram ignores constant offsets") {
    std::mt19937_64 rng(131);
    const Eigen::Matrix3Xd traj = test::random_matrix(rng, 3, 14).topRows(3);
    Eigen::Matrix3Xd shifted = traj;
    shifted.colwise() += Eigen::Vector3d(100.0, -40.0, 7.0);
    const TrajectorySpectrum a = trajectory_spectrum(traj);
    const TrajectorySpectrum b = trajectory_spectrum(shifted);
    CHECK((a.periodogram - b.periodogram).cwiseAbs().maxCoeff() < 1e-9);
}
