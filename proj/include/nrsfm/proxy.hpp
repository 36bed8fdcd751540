/* proxy.hpp -- kernel-built spatial weight matrix and proxy shapes. The
 * non-rigid region degenerates into a single super point so low-rank
 * pressure concentrates on the nearly rigid region. */

#ifndef NRSFM_PROXY_HPP
#define NRSFM_PROXY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nrsfm/segment.hpp"
#include "nrsfm/types.hpp"

namespace nrsfm {

struct ProxyConfig {
    double alpha_r = 1.0;      // fraction of nearly rigid points, (0, 1]
    double delta_r = 1.0 / 3;  // rigid-point coupling, [0, 1)
    int m_f = 2;

    /* Non-rigid feature weight 1/sqrt((1 - alpha_r) P); only defined for
     * alpha_r < 1. */
    double delta_nr(int points) const {
        return 1.0 / std::sqrt((1.0 - alpha_r) * points);
    }
};

/* Feature vector of point i in R^{P+1}: nearly rigid points keep their own
 * axis plus a shared component, non-rigid points collapse onto the shared
 * axis only. */
inline Eigen::VectorXd feature_map(int i, const SegmentationResult& seg,
                                   const ProxyConfig& cfg) {
    const int p = static_cast<int>(seg.deform_freq.size());
    if (i < 0 || i >= p) throw std::invalid_argument("feature_map: index out of range");
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(p + 1);
    const bool rigid =
        std::binary_search(seg.rigid_set.begin(), seg.rigid_set.end(), i);
    if (rigid) {
        phi(i) = std::sqrt(1.0 - cfg.delta_r * cfg.delta_r);
        phi(p) = cfg.delta_r;
    } else {
        phi(p) = cfg.delta_nr(p);
    }
    return phi;
}

struct WeightMatrix {
    Eigen::MatrixXd lambda;  // P x P Gram matrix of the feature vectors
    std::vector<int> rigid_set;
    double delta_r = 0.0;
    double delta_nr = 0.0;
};

/* Lambda_{ij} = <phi(i), phi(j)>, assembled from the closed-form inner
 * products so the result is symmetric exactly. */
inline WeightMatrix build_weight_matrix(const SegmentationResult& seg,
                                        const ProxyConfig& cfg) {
    const int p = static_cast<int>(seg.deform_freq.size());
    std::vector<bool> rigid(p, false);
    for (int i : seg.rigid_set) rigid[i] = true;
    const bool all_rigid = static_cast<int>(seg.rigid_set.size()) == p;
    const double d_r = cfg.delta_r;
    const double d_nr = all_rigid ? 0.0 : cfg.delta_nr(p);

    WeightMatrix out;
    out.rigid_set = seg.rigid_set;
    out.delta_r = d_r;
    out.delta_nr = d_nr;
    out.lambda.resize(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double value;
            if (rigid[i] && rigid[j])
                value = (i == j ? 1.0 - d_r * d_r : 0.0) + d_r * d_r;
            else if (!rigid[i] && !rigid[j])
                value = d_nr * d_nr;
            else
                value = d_r * d_nr;
            out.lambda(i, j) = value;
            out.lambda(j, i) = value;
        }
    }
    return out;
}

/* Proxy sequence S * Lambda. */
inline ShapeSequence proxy_shape(const ShapeSequence& s_hat, const WeightMatrix& lam) {
    if (s_hat.points() != lam.lambda.rows())
        throw std::invalid_argument("proxy_shape: column count mismatch");
    return ShapeSequence(s_hat.s * lam.lambda, ShapeCoord::Proxy);
}

}  // namespace nrsfm

#endif  // NRSFM_PROXY_HPP
