#include "tcage/explain.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace tcage {

Eigen::MatrixXd linear_shap(const RidgeModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.coefficients.rows())
        throw std::invalid_argument("linear_shap dim mismatch");
    Eigen::VectorXd delta = x - model.feature_means;
    // (m x d): row o, column i = B(i, o) * delta_i
    return model.coefficients.transpose().array().rowwise() *
           delta.transpose().array();
}

Eigen::VectorXd median_reduce(const Eigen::MatrixXd& shap) {
    const auto m = shap.rows();
    const auto d = shap.cols();
    if (m < 1) throw std::invalid_argument("median_reduce: no output rows");
    Eigen::VectorXd out(d);
    std::vector<double> col(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index o = 0; o < m; ++o) col[static_cast<std::size_t>(o)] = shap(o, i);
        auto mid = col.begin() + m / 2;
        std::nth_element(col.begin(), mid, col.end());
        if (m % 2 == 1) {
            out[i] = *mid;
        } else {
            double hi = *mid;
            double lo = *std::max_element(col.begin(), mid);
            out[i] = 0.5 * (lo + hi);
        }
    }
    return out;
}

Eigen::VectorXd reduced_shap(const RidgeModel& model, const Eigen::VectorXd& x) {
    return median_reduce(linear_shap(model, x));
}

}  // namespace tcage
