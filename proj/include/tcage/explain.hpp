#pragma once

#include <Eigen/Dense>

#include "tcage/linmodel.hpp"

namespace tcage {

// Interventional linear SHAP: values(o, i) = B(i, o) * (x_i - mu_i), one row
// per model output. Rows sum to prediction minus prediction-at-train-mean.
Eigen::MatrixXd linear_shap(const RidgeModel& model, const Eigen::VectorXd& x);

// Per-feature median across the output rows; even row counts take the
// midpoint of the central pair.
Eigen::VectorXd median_reduce(const Eigen::MatrixXd& shap);

Eigen::VectorXd reduced_shap(const RidgeModel& model, const Eigen::VectorXd& x);

}  // namespace tcage
