#include "tcage/iforest.hpp"

#include <cmath>
#include <stdexcept>

#include "tcage/parallel.hpp"
#include "tcage/rng.hpp"

namespace tcage {

namespace {

constexpr double kEulerGamma = 0.5772156649;

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    IsolationTree& tree;
    Rng& rng;
    int depth_cap;

    // Builds the node over X rows `idx[lo..hi)`; returns node index.
    int build(std::vector<int>& idx, int lo, int hi, int depth) {
        const int size = hi - lo;
        const int d = static_cast<int>(X.cols());
        if (size <= 1 || depth >= depth_cap) return make_leaf(size);

        // pick a uniformly random non-constant feature; all-constant -> leaf
        int feature = -1;
        double fmin = 0.0, fmax = 0.0;
        std::vector<int> candidates(d);
        for (int j = 0; j < d; ++j) candidates[j] = j;
        for (int remaining = d; remaining > 0; --remaining) {
            int pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(remaining)));
            int f = candidates[pick];
            candidates[pick] = candidates[remaining - 1];
            double lo_v = X(idx[lo], f), hi_v = lo_v;
            for (int i = lo + 1; i < hi; ++i) {
                double v = X(idx[i], f);
                lo_v = std::min(lo_v, v);
                hi_v = std::max(hi_v, v);
            }
            if (lo_v < hi_v) {
                feature = f;
                fmin = lo_v;
                fmax = hi_v;
                break;
            }
        }
        if (feature < 0) return make_leaf(size);

        // threshold strictly inside (min, max)
        double thr = fmin + rng.uniform01() * (fmax - fmin);
        for (int tries = 0; (thr <= fmin || thr >= fmax) && tries < 8; ++tries)
            thr = fmin + rng.uniform01() * (fmax - fmin);
        if (thr <= fmin || thr >= fmax) thr = fmin + 0.5 * (fmax - fmin);

        int mid = lo;
        for (int i = lo; i < hi; ++i)
            if (X(idx[i], feature) < thr) std::swap(idx[i], idx[mid++]);

        int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node].feature = feature;
        tree.nodes[node].threshold = thr;
        tree.nodes[node].size = size;
        int left = build(idx, lo, mid, depth + 1);
        int right = build(idx, mid, hi, depth + 1);
        tree.nodes[node].left = left;
        tree.nodes[node].right = right;
        return node;
    }

    int make_leaf(int size) {
        int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node].size = size;
        return node;
    }
};

}  // namespace

double avg_path_length_c(int n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    double nn = static_cast<double>(n);
    return 2.0 * (std::log(nn - 1.0) + kEulerGamma) - 2.0 * (nn - 1.0) / nn;
}

IsolationForestModel iforest_fit(const Eigen::MatrixXd& X, int n_trees, int psi,
                                 std::uint64_t seed, int threads) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) throw std::invalid_argument("iforest_fit needs at least 2 rows");
    if (n_trees < 1) throw std::invalid_argument("iforest_fit needs at least 1 tree");
    if (psi <= 0) psi = std::min(256, n);
    psi = std::min(psi, n);
    if (psi < 2) psi = 2;
    const int depth_cap = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

    IsolationForestModel m;
    m.subsample_size = psi;
    m.dim = static_cast<int>(X.cols());
    m.seed = seed;
    m.trees.resize(static_cast<std::size_t>(n_trees));

    parallel_for(static_cast<std::size_t>(n_trees), threads, [&](std::size_t t) {
        Rng rng(derive_seed(seed, 0x1F, t));
        // without-replacement subsample of size psi (partial Fisher-Yates)
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < psi; ++i) {
            int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> idx(pool.begin(), pool.begin() + psi);
        TreeBuilder builder{X, m.trees[t], rng, depth_cap};
        builder.build(idx, 0, psi, 0);
    });
    return m;
}

double path_length(const IsolationTree& tree, const Eigen::VectorXd& x) {
    int node = 0;
    int depth = 0;
    for (;;) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.feature < 0) return static_cast<double>(depth) + avg_path_length_c(nd.size);
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
        ++depth;
    }
}

double anomaly_score(const IsolationForestModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.dim) throw std::invalid_argument("iforest dim mismatch");
    double sum = 0.0;
    for (const auto& tree : m.trees) sum += path_length(tree, x);
    double mean_path = sum / static_cast<double>(m.trees.size());
    return std::exp2(-mean_path / avg_path_length_c(m.subsample_size));
}

double decision_score(const IsolationForestModel& m, const Eigen::VectorXd& x) {
    return -anomaly_score(m, x) - m.offset;
}

Eigen::VectorXd decision_scores(const IsolationForestModel& m, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[i] = decision_score(m, X.row(i).transpose());
    return out;
}

}  // namespace tcage
