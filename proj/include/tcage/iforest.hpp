#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace tcage {

struct IsolationTree {
    // internal node: feature >= 0, children index into `nodes`;
    // leaf: feature == -1, `size` holds the point count
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int size = 0;
    };
    std::vector<Node> nodes;
};

struct IsolationForestModel {
    std::vector<IsolationTree> trees;
    int subsample_size = 256;
    int dim = 0;
    double offset = -0.5;
    std::uint64_t seed = 0;
};

// c(n): average unsuccessful-search path length of a BST over n points.
double avg_path_length_c(int n);

// psi <= 0 selects the default min(256, n). Per-tree RNG streams derive
// from (seed, tree index), so tree construction order never matters.
IsolationForestModel iforest_fit(const Eigen::MatrixXd& X, int n_trees = 100,
                                 int psi = 0, std::uint64_t seed = 0,
                                 int threads = 1);

double path_length(const IsolationTree& tree, const Eigen::VectorXd& x);

// s = 2^(-E[h(x)]/c(psi)), in (0, 1); larger is more anomalous.
double anomaly_score(const IsolationForestModel& m, const Eigen::VectorXd& x);

// 0.5 - s; positive flags inliers, negative outliers.
double decision_score(const IsolationForestModel& m, const Eigen::VectorXd& x);

Eigen::VectorXd decision_scores(const IsolationForestModel& m, const Eigen::MatrixXd& X);

}  // namespace tcage
