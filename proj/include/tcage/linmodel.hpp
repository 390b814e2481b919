#pragma once

#include <Eigen/Dense>

namespace tcage {

// Zero-mean unit-variance scaling; constant columns keep scale 1.
struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd scales;

    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& Z) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& X);

// Multi-output Ridge with unpenalized intercept. feature_means keeps the
// training column means used by the linear SHAP explainer.
struct RidgeModel {
    double alpha = 1.0;
    Eigen::MatrixXd coefficients;  // d x m
    Eigen::VectorXd intercepts;    // m
    Eigen::VectorXd feature_means; // d

    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
};

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double alpha);

struct PcaModel {
    Eigen::VectorXd mean;                 // d
    Eigen::MatrixXd components;           // k x d, orthonormal rows
    Eigen::VectorXd explained_variances;  // k, non-increasing

    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

// Top-k eigenvectors of the sample covariance, eigenvalues descending.
// Deterministic orientation: each component's largest-magnitude entry is
// made positive.
PcaModel pca_fit(const Eigen::MatrixXd& X, int k);

}  // namespace tcage
