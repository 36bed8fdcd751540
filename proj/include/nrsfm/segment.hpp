/* segment.hpp -- DFT-based trajectory frequency analysis and nearly-rigid
 * region segmentation. */

#ifndef NRSFM_SEGMENT_HPP
#define NRSFM_SEGMENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nrsfm/types.hpp"

namespace nrsfm {

struct TrajectorySpectrum {
    Eigen::Matrix3Xcd coeffs;     // d(w_k), F complex 3-vectors
    Eigen::VectorXd periodogram;  // P_g(w_k) = (4/F) ||d(w_k)||^2
    Eigen::VectorXd frequencies;  // w_k = k/F
};

/* Scaled periodogram of a 3D trajectory (3 x F). The trajectory is
 * mean-centered first so the DC bin carries no position offset:
 * d(w_k) = F^{-1/2} sum_t s_t exp(-2 pi i t k / F). */
inline TrajectorySpectrum trajectory_spectrum(const Eigen::Matrix3Xd& traj) {
    const int f = static_cast<int>(traj.cols());
    if (f < 2) throw std::invalid_argument("trajectory_spectrum: need F >= 2");

    const Eigen::Vector3d mean = traj.rowwise().mean();
    const Eigen::Matrix3Xd centered = traj.colwise() - mean;

    TrajectorySpectrum out;
    out.coeffs.resize(3, f);
    out.periodogram.resize(f);
    out.frequencies.resize(f);
    const double root = 1.0 / std::sqrt(static_cast<double>(f));
    for (int k = 0; k < f; ++k) {
        Eigen::Vector3cd d = Eigen::Vector3cd::Zero();
        for (int t = 0; t < f; ++t) {
            const double angle = -2.0 * M_PI * static_cast<double>((t + 1)) * k / f;
            d += centered.col(t) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        d *= root;
        out.coeffs.col(k) = d;
        out.periodogram(k) = 4.0 / f * d.squaredNorm();
        out.frequencies(k) = static_cast<double>(k) / f;
    }
    return out;
}

/* Average frequency of the m_f strongest periodogram bins; ties go to the
 * lower bin. With folding (default) each bin reports min(k, F-k)/F so a
 * real sinusoid's conjugate pair lands on one frequency. An all-zero
 * periodogram maps to 0 by convention. */
inline double deformation_frequency(const TrajectorySpectrum& spec, int m_f,
                                    bool fold = true) {
    const int f = static_cast<int>(spec.periodogram.size());
    if (m_f < 1 || m_f > f)
        throw std::invalid_argument("deformation_frequency: m_f out of range");
    if (spec.periodogram.maxCoeff() <= 0.0) return 0.0;

    std::vector<int> order(f);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (spec.periodogram(a) != spec.periodogram(b))
            return spec.periodogram(a) > spec.periodogram(b);
        return a < b;
    });

    double sum = 0.0;
    for (int m = 0; m < m_f; ++m) {
        const int k = order[m];
        const int k_eff = fold ? std::min(k, f - k) : k;
        sum += static_cast<double>(k_eff) / f;
    }
    return sum / m_f;
}

struct SegmentationResult {
    std::vector<int> rigid_set;   // indices of the nearly rigid points, ascending
    Eigen::VectorXd deform_freq;  // d^f per point
    double alpha_r = 1.0;
    int m_f = 2;
};

/* Rank all trajectories by deformation frequency and keep the
 * round(alpha_r * P) lowest as the nearly rigid set. Ties break by point
 * index. */
inline SegmentationResult segment_nearly_rigid(const ShapeSequence& s, double alpha_r,
                                               int m_f, bool fold = true) {
    if (alpha_r <= 0.0 || alpha_r > 1.0)
        throw std::invalid_argument("segment_nearly_rigid: alpha_r must be in (0, 1]");
    const int p = s.points();
    const int f = s.frames();

    SegmentationResult out;
    out.alpha_r = alpha_r;
    out.m_f = m_f;
    out.deform_freq.resize(p);
    for (int j = 0; j < p; ++j) {
        Eigen::Matrix3Xd traj(3, f);
        for (int i = 0; i < f; ++i) traj.col(i) = s.frame(i).col(j);
        out.deform_freq(j) = deformation_frequency(trajectory_spectrum(traj), m_f, fold);
    }

    const int n_rigid = static_cast<int>(std::floor(alpha_r * p + 0.5));  // round half up
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (out.deform_freq(a) != out.deform_freq(b))
            return out.deform_freq(a) < out.deform_freq(b);
        return a < b;
    });
    out.rigid_set.assign(order.begin(), order.begin() + n_rigid);
    std::sort(out.rigid_set.begin(), out.rigid_set.end());
    return out;
}

}  // namespace nrsfm

#endif  // NRSFM_SEGMENT_HPP
