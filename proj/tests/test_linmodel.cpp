#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tcage/linmodel.hpp"
#include "tcage/model_io.hpp"
#include "tcage/rng.hpp"

using namespace tcage;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int n, int d) {
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
    return X;
}

// Jacobi eigenvalue iteration; independent oracle for the PCA subspace.
void jacobi_eigen(Eigen::MatrixXd A, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(A.rows());
    vectors = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-18) continue;
                double theta = 0.5 * std::atan2(2.0 * A(p, q), A(q, q) - A(p, p));
                double c = std::cos(theta), s = std::sin(theta);
                Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
                J(p, p) = c;
                J(q, q) = c;
                J(p, q) = s;
                J(q, p) = -s;
                A = J.transpose() * A * J;
                vectors = vectors * J;
            }
        }
    }
    values = A.diagonal();
}

}  // namespace

TEST_CASE("standardizer basic example") {
    Eigen::MatrixXd X(2, 1);
    X << 1, 3;
    Standardizer s = fit_standardizer(X);
    CHECK(s.means[0] == 2.0);
    CHECK(s.scales[0] == 1.0);  // population sigma of [1,3]
    Eigen::MatrixXd Z = s.transform(X);
    CHECK(Z(0, 0) == -1.0);
    CHECK(Z(1, 0) == 1.0);
}

TEST_CASE("standardizer constant column") {
    Eigen::MatrixXd X(3, 2);
    X << 5, 1, 5, 2, 5, 3;
    Standardizer s = fit_standardizer(X);
    CHECK(s.scales[0] == 1.0);
    Eigen::MatrixXd Z = s.transform(X);
    CHECK(Z(0, 0) == 0.0);
    CHECK(Z(1, 0) == 0.0);
    CHECK(Z(2, 0) == 0.0);
}

TEST_CASE("standardizer round trip and zero train means") {
    Rng rng(1);
    Eigen::MatrixXd X = random_matrix(rng, 40, 7);
    X.col(3) *= 100.0;
    Standardizer s = fit_standardizer(X);
    Eigen::MatrixXd Z = s.transform(X);
    for (int j = 0; j < 7; ++j) CHECK(std::abs(Z.col(j).mean()) < 1e-10);
    Eigen::MatrixXd back = s.inverse_transform(Z);
    CHECK(((back - X).cwiseAbs().maxCoeff() /
           (1.0 + X.cwiseAbs().maxCoeff())) < 1e-12);
    CHECK_THROWS_AS(fit_standardizer(Eigen::MatrixXd(1, 3)), std::invalid_argument);
}

TEST_CASE("ridge scalar example: slope 2/3 at alpha 1") {
    Eigen::MatrixXd X(2, 1), Y(2, 1);
    X << -1, 1;
    Y << -1, 1;
    RidgeModel m = ridge_fit(X, Y, 1.0);
    CHECK(m.coefficients(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(m.intercepts[0] == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(m.predict(x)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("ridge zero targets give zero model") {
    Rng rng(2);
    Eigen::MatrixXd X = random_matrix(rng, 20, 4);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(20, 3);
    RidgeModel m = ridge_fit(X, Y, 1.0);
    CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(m.intercepts.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ridge limiting alpha shrinks to column means") {
    Rng rng(3);
    Eigen::MatrixXd X = random_matrix(rng, 30, 5);
    Eigen::MatrixXd Y = random_matrix(rng, 30, 2);
    RidgeModel m = ridge_fit(X, Y, 1e12);
    CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-6);
    for (int o = 0; o < 2; ++o)
        CHECK(m.intercepts[o] == doctest::Approx(Y.col(o).mean()).epsilon(1e-6));
}

TEST_CASE("ridge predicts exactly the target mean at the train mean") {
    Rng rng(4);
    Eigen::MatrixXd X = random_matrix(rng, 25, 6);
    Eigen::MatrixXd Y = random_matrix(rng, 25, 3);
    RidgeModel m = ridge_fit(X, Y, 0.7);
    Eigen::VectorXd pred = m.predict(Eigen::VectorXd(X.colwise().mean()));
    for (int o = 0; o < 3; ++o)
        CHECK(pred[o] == doctest::Approx(Y.col(o).mean()).epsilon(1e-12));
}

TEST_CASE("ridge normal-equation residual bound on random instances") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 5 + static_cast<int>(rng.uniform_index(196));
        int d = 1 + static_cast<int>(rng.uniform_index(50));
        int m_out = 1 + static_cast<int>(rng.uniform_index(10));
        double alpha = std::exp(rng.uniform(-3.0, 3.0));
        Eigen::MatrixXd X = random_matrix(rng, n, d);
        Eigen::MatrixXd Y = random_matrix(rng, n, m_out);
        RidgeModel m = ridge_fit(X, Y, alpha);
        Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
        Eigen::MatrixXd Yc = Y.rowwise() - Y.colwise().mean();
        Eigen::MatrixXd res =
            Xc.transpose() * (Xc * m.coefficients - Yc) + alpha * m.coefficients;
        double bound = 1e-8 * (1.0 + (Xc.transpose() * Yc).cwiseAbs().maxCoeff());
        CHECK(res.cwiseAbs().maxCoeff() < bound);
    }
}

TEST_CASE("ridge monotone shrinkage in alpha") {
    Rng rng(6);
    Eigen::MatrixXd X = random_matrix(rng, 50, 8);
    Eigen::MatrixXd Y = random_matrix(rng, 50, 4);
    double prev = ridge_fit(X, Y, 0.01).coefficients.norm();
    for (double alpha : {0.1, 1.0, 10.0, 100.0}) {
        double cur = ridge_fit(X, Y, alpha).coefficients.norm();
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("ridge rejects bad arguments") {
    Eigen::MatrixXd X(2, 1), Y(3, 1);
    CHECK_THROWS_AS(ridge_fit(X, Y, 1.0), std::invalid_argument);
    Eigen::MatrixXd Y2(2, 1);
    CHECK_THROWS_AS(ridge_fit(X, Y2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ridge_fit(X, Y2, -1.0), std::invalid_argument);
}

TEST_CASE("pca symmetry example with sign convention") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 1, -1, -1, 2, 2, -2, -2;
    PcaModel m = pca_fit(X, 1);
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(m.components(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(m.components(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    // the single component explains all variance
    double total = ((X.rowwise() - X.colwise().mean()).squaredNorm()) / 3.0;
    CHECK(m.explained_variances[0] == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("pca with k=d preserves pairwise distances") {
    Rng rng(7);
    Eigen::MatrixXd X = random_matrix(rng, 30, 5);
    PcaModel m = pca_fit(X, 5);
    Eigen::MatrixXd Z = m.transform(X);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            CHECK((Z.row(i) - Z.row(j)).norm() ==
                  doctest::Approx((X.row(i) - X.row(j)).norm()).epsilon(1e-8));
}

TEST_CASE("pca matches an independent Jacobi eigendecomposition oracle") {
    Rng rng(8);
    Eigen::MatrixXd X = random_matrix(rng, 50, 10);
    PcaModel m = pca_fit(X, 3);

    Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    Eigen::MatrixXd cov = Xc.transpose() * Xc / 49.0;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    jacobi_eigen(cov, values, vectors);
    std::vector<int> order(10);
    for (int i = 0; i < 10; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });

    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd oracle = vectors.col(order[i]);
        double cosang = std::abs(oracle.dot(m.components.row(i).transpose()));
        CHECK(std::acos(std::min(1.0, cosang)) < 1e-6);
        CHECK(m.explained_variances[i] ==
              doctest::Approx(values[order[i]]).epsilon(1e-8));
    }
}

TEST_CASE("pca invariants: orthonormal rows, non-increasing variances, reconstruction") {
    Rng rng(9);
    Eigen::MatrixXd X = random_matrix(rng, 40, 8);
    double prev_err = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) {
        PcaModel m = pca_fit(X, k);
        Eigen::MatrixXd G = m.components * m.components.transpose();
        CHECK((G - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
        for (int i = 1; i < k; ++i)
            CHECK(m.explained_variances[i] <= m.explained_variances[i - 1] + 1e-12);
        Eigen::MatrixXd Z = m.transform(X);
        Eigen::MatrixXd recon = (Z * m.components).rowwise() + m.mean.transpose();
        double err = (recon - X).norm();
        CHECK(err <= prev_err + 1e-9);
        prev_err = err;
    }
    CHECK_THROWS_AS(pca_fit(X, 0), std::invalid_argument);
    CHECK_THROWS_AS(pca_fit(X, 9), std::invalid_argument);
}

TEST_CASE("model persistence round trips") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "tcage_test_models";
    fs::create_directories(dir);
    Rng rng(10);
    Eigen::MatrixXd X = random_matrix(rng, 30, 6);
    Eigen::MatrixXd Y = random_matrix(rng, 30, 2);

    Standardizer s = fit_standardizer(X);
    save_model(s, dir / "std");
    Standardizer s2 = load_standardizer(dir / "std");
    CHECK(s.means == s2.means);
    CHECK(s.scales == s2.scales);

    RidgeModel r = ridge_fit(X, Y, 1.0);
    save_model(r, dir / "ridge");
    RidgeModel r2 = load_ridge(dir / "ridge");
    CHECK(r.alpha == r2.alpha);
    CHECK(r.coefficients == r2.coefficients);
    CHECK(r.intercepts == r2.intercepts);
    CHECK(r.feature_means == r2.feature_means);

    PcaModel p = pca_fit(X, 3);
    save_model(p, dir / "pca");
    PcaModel p2 = load_pca(dir / "pca");
    CHECK(p.mean == p2.mean);
    CHECK(p.components == p2.components);
    CHECK(p.explained_variances == p2.explained_variances);
}
