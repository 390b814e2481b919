#include "tcage/linmodel.hpp"

#include <stdexcept>

namespace tcage {

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != means.size()) throw std::invalid_argument("standardizer dim mismatch");
    return (X.rowwise() - means.transpose()).array().rowwise() /
           scales.transpose().array();
}

Eigen::VectorXd Standardizer::transform(const Eigen::VectorXd& x) const {
    if (x.size() != means.size()) throw std::invalid_argument("standardizer dim mismatch");
    return (x - means).cwiseQuotient(scales);
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::MatrixXd& Z) const {
    if (Z.cols() != means.size()) throw std::invalid_argument("standardizer dim mismatch");
    return ((Z.array().rowwise() * scales.transpose().array()).rowwise() +
            means.transpose().array());
}

Standardizer fit_standardizer(const Eigen::MatrixXd& X) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (n < 2) throw std::invalid_argument("fit_standardizer needs at least 2 rows");
    Standardizer s;
    s.means.resize(d);
    s.scales.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double lo = X.col(j).minCoeff();
        double hi = X.col(j).maxCoeff();
        if (lo == hi) {
            // constant column: transform to exact zeros, keep scale 1
            s.means[j] = lo;
            s.scales[j] = 1.0;
            continue;
        }
        double mean = X.col(j).mean();
        double var = (X.col(j).array() - mean).square().sum() / static_cast<double>(n);
        double sd = std::sqrt(var);
        s.means[j] = mean;
        s.scales[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Eigen::MatrixXd RidgeModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != coefficients.rows()) throw std::invalid_argument("ridge dim mismatch");
    return (X * coefficients).rowwise() + intercepts.transpose();
}

Eigen::VectorXd RidgeModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != coefficients.rows()) throw std::invalid_argument("ridge dim mismatch");
    return coefficients.transpose() * x + intercepts;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double alpha) {
    if (X.rows() != Y.rows()) throw std::invalid_argument("ridge: X/Y row mismatch");
    if (X.rows() < 1) throw std::invalid_argument("ridge: empty data");
    if (!(alpha > 0.0)) throw std::invalid_argument("ridge: alpha must be > 0");
    const auto d = X.cols();

    Eigen::VectorXd xbar = X.colwise().mean();
    Eigen::VectorXd ybar = Y.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - xbar.transpose();
    Eigen::MatrixXd Yc = Y.rowwise() - ybar.transpose();

    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += alpha;
    RidgeModel m;
    m.alpha = alpha;
    m.coefficients = A.ldlt().solve(Xc.transpose() * Yc);
    m.intercepts = ybar - m.coefficients.transpose() * xbar;
    m.feature_means = xbar;
    return m;
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size()) throw std::invalid_argument("pca dim mismatch");
    return (X.rowwise() - mean.transpose()) * components.transpose();
}

PcaModel pca_fit(const Eigen::MatrixXd& X, int k) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (k < 1 || k > std::min<Eigen::Index>(n - 1, d))
        throw std::invalid_argument("pca: k out of range");

    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (Xc.transpose() * Xc) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");

    PcaModel m;
    m.mean = std::move(mean);
    m.components.resize(k, d);
    m.explained_variances.resize(k);
    // Eigen returns eigenvalues ascending; take the top k from the back.
    for (int i = 0; i < k; ++i) {
        Eigen::Index src = d - 1 - i;
        Eigen::VectorXd v = es.eigenvectors().col(src);
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        m.components.row(i) = v.transpose();
        m.explained_variances[i] = std::max(0.0, es.eigenvalues()[src]);
    }
    return m;
}

}  // namespace tcage
