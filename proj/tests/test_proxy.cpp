#include <doctest.h>

#include <random>

#include "nrsfm/proxy.hpp"
#include "nrsfm/seqdata.hpp"
#include "test_helpers.hpp"

using namespace nrsfm;

namespace {

SegmentationResult make_segmentation(int points, std::vector<int> rigid) {
    SegmentationResult seg;
    seg.deform_freq = Eigen::VectorXd::Zero(points);
    seg.rigid_set = std::move(rigid);
    seg.alpha_r = static_cast<double>(seg.rigid_set.size()) / points;
    return seg;
}

int numeric_rank(const Eigen::MatrixXd& m, double tol = 1e-10) {
    const Eigen::VectorXd sv = m.jacobiSvd().singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    return rank;
}

}  // namespace

TEST_CASE("feature_map cases") {
    const int p = 6;
    const SegmentationResult seg = make_segmentation(p, {0, 1, 2});
    ProxyConfig cfg;
    cfg.alpha_r = 0.5;

    cfg.delta_r = 0.0;
    CHECK((feature_map(1, seg, cfg) - Eigen::VectorXd::Unit(p + 1, 1)).norm() == 0.0);

    cfg.delta_r = 1.0 / 3;
    const Eigen::VectorXd nr3 = feature_map(3, seg, cfg);
    const Eigen::VectorXd nr5 = feature_map(5, seg, cfg);
    CHECK(nr3 == nr5);  // the whole non-rigid region shares one feature
    CHECK(nr3(p) == doctest::Approx(cfg.delta_nr(p)));
    CHECK(nr3.head(p).norm() == 0.0);

    CHECK(feature_map(0, seg, cfg).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight matrix closed forms") {
    const int p = 5;
    ProxyConfig cfg;
    cfg.alpha_r = 1.0;
    cfg.delta_r = 1.0 / 3;

    // alpha_r = 1: shrink matrix (1 - d^2) I + d^2 1 1^T
    const SegmentationResult all = make_segmentation(p, {0, 1, 2, 3, 4});
    const WeightMatrix lam = build_weight_matrix(all, cfg);
    const double d2 = cfg.delta_r * cfg.delta_r;
    const Eigen::MatrixXd expected = (1 - d2) * Eigen::MatrixXd::Identity(p, p) +
                                     d2 * Eigen::MatrixXd::Ones(p, p);
    CHECK((lam.lambda - expected).cwiseAbs().maxCoeff() < 1e-15);

    cfg.delta_r = 0.0;
    CHECK((build_weight_matrix(all, cfg).lambda - Eigen::MatrixXd::Identity(p, p))
              .norm() == 0.0);

    // mixed entries
    cfg.delta_r = 1.0 / 3;
    cfg.alpha_r = 0.6;
    const SegmentationResult seg = make_segmentation(p, {0, 1, 2});
    const WeightMatrix mixed = build_weight_matrix(seg, cfg);
    const double d_nr = cfg.delta_nr(p);
    CHECK(mixed.lambda(3, 4) == doctest::Approx(d_nr * d_nr).epsilon(1e-15));
    CHECK(mixed.lambda(3, 4) == doctest::Approx(1.0 / ((1 - 0.6) * p)).epsilon(1e-12));
    CHECK(mixed.lambda(0, 3) == doctest::Approx(cfg.delta_r * d_nr).epsilon(1e-15));
    CHECK(mixed.lambda(0, 1) == doctest::Approx(d2).epsilon(1e-15));
    CHECK(mixed.lambda(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("weight matrix is an exact-symmetric PSD Gram matrix") {
    const int p = 9;
    ProxyConfig cfg;
    cfg.alpha_r = 2.0 / 3;
    cfg.delta_r = 0.25;
    const SegmentationResult seg = make_segmentation(p, {0, 2, 3, 5, 6, 8});
    const WeightMatrix lam = build_weight_matrix(seg, cfg);

    CHECK((lam.lambda - lam.lambda.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lam.lambda);
    CHECK(eig.eigenvalues()(0) >= -1e-10);

    // Gram check against explicit feature vectors
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            CHECK(lam.lambda(i, j) ==
                  doctest::Approx(feature_map(i, seg, cfg).dot(feature_map(j, seg, cfg)))
                      .epsilon(1e-14));
}

TEST_CASE("weight matrix rank is |rigid set| + 1 when alpha_r < 1") {
    const int p = 8;
    ProxyConfig cfg;
    cfg.alpha_r = 0.5;
    for (double delta_r : {0.0, 1.0 / 3}) {
        cfg.delta_r = delta_r;
        const SegmentationResult seg = make_segmentation(p, {1, 3, 5, 7});
        CHECK(numeric_rank(build_weight_matrix(seg, cfg).lambda) == 5);
    }
}

TEST_CASE("shrink-matrix singular values when alpha_r = 1") {
    const int p = 7;
    ProxyConfig cfg;
    cfg.alpha_r = 1.0;
    cfg.delta_r = 1.0 / 3;
    const SegmentationResult all = make_segmentation(p, {0, 1, 2, 3, 4, 5, 6});
    const Eigen::VectorXd sv =
        build_weight_matrix(all, cfg).lambda.jacobiSvd().singularValues();
    const double d2 = cfg.delta_r * cfg.delta_r;
    CHECK(sv(0) == doctest::Approx(1 - d2 + p * d2).epsilon(1e-10));
    for (int i = 1; i < p; ++i) CHECK(sv(i) == doctest::Approx(1 - d2).epsilon(1e-10));
}

TEST_CASE("proxy_shape") {
    std::mt19937_64 rng(139);
    const int f = 6, p = 8;
    const ShapeSequence s_hat = test::random_shape_sequence(rng, f, p);

    ProxyConfig cfg;
    cfg.alpha_r = 0.5;
    cfg.delta_r = 1.0 / 3;
    const SegmentationResult seg = make_segmentation(p, {0, 1, 2, 3});
    const WeightMatrix lam = build_weight_matrix(seg, cfg);

    // identity kernel keeps the sequence
    WeightMatrix id;
    id.lambda = Eigen::MatrixXd::Identity(p, p);
    CHECK(proxy_shape(s_hat, id).s == s_hat.s);

    // all non-rigid columns agree and match the column arithmetic
    const ShapeSequence breve = proxy_shape(s_hat, lam);
    const double d_nr = cfg.delta_nr(p);
    for (int i = 0; i < f; ++i) {
        Eigen::Vector3d super = Eigen::Vector3d::Zero();
        for (int j = 4; j < p; ++j) super += d_nr * d_nr * s_hat.frame(i).col(j);
        for (int j = 0; j < 4; ++j) super += cfg.delta_r * d_nr * s_hat.frame(i).col(j);
        for (int j = 4; j < p; ++j)
            CHECK((breve.frame(i).col(j) - super).norm() < 1e-12);
    }

    // right-multiplication cannot raise the rearranged rank
    CHECK(numeric_rank(rearrange(breve).s_sharp, 1e-9) <=
          numeric_rank(rearrange(s_hat).s_sharp, 1e-9));
}
