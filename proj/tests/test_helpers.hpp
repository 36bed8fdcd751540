/* test_helpers.hpp -- shared generators for randomized tests. */

#ifndef NRSFM_TEST_HELPERS_HPP
#define NRSFM_TEST_HELPERS_HPP

#include <Eigen/Dense>

#include <random>

#include "nrsfm/geometry.hpp"
#include "nrsfm/types.hpp"

namespace test {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline Eigen::Vector3d random_vector3(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    return Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    return nrsfm::exp_so3(random_vector3(rng));
}

inline nrsfm::RotationSequence random_rotation_sequence(std::mt19937_64& rng, int frames) {
    std::vector<Eigen::Matrix3d> rots(frames);
    for (int i = 0; i < frames; ++i) rots[i] = random_rotation(rng);
    return nrsfm::RotationSequence(std::move(rots));
}

inline nrsfm::ShapeSequence random_shape_sequence(std::mt19937_64& rng, int frames,
                                                  int points) {
    return nrsfm::ShapeSequence(random_matrix(rng, 3 * frames, points));
}

}  // namespace test

#endif  // NRSFM_TEST_HELPERS_HPP
