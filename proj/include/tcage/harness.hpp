#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcage/encode.hpp"
#include "tcage/iforest.hpp"
#include "tcage/linmodel.hpp"

namespace tcage {

struct FoldPlan {
    int k = 10;
    std::map<std::string, int> assignments;  // group id -> fold
    std::uint64_t seed = 0;

    int fold_of(const std::string& group) const;
};

enum class SetupKind { X, YTrue, XShap };

const char* setup_name(SetupKind kind);
SetupKind setup_from_name(const std::string& name);

struct SampleRecord {
    std::string planet_id;
    int spot_config_index = 0;
    int fold = 0;
    double decision_score = 0.0;
    double rmse = 0.0;
    Eigen::VectorXd prediction;
};

struct TradeoffPoint {
    double threshold = 0.0;
    double coverage = 0.0;
    std::optional<double> rmse_accepted;
};

struct TradeoffCurve {
    std::vector<TradeoffPoint> points;
};

struct HarnessConfig {
    double ridge_alpha = 1.0;
    int pca_k = 30;
    int iforest_trees = 100;
    int iforest_psi = 0;  // <= 0: min(256, n)
    std::uint64_t seed = 0;
    int threads = 1;
};

// Per-fold fitted parameters, exposed for leakage auditing.
struct FoldModels {
    Standardizer input_standardizer;
    RidgeModel ridge;
    Standardizer anomaly_standardizer;
    PcaModel pca;
    IsolationForestModel iforest;
};

// Distinct groups are shuffled by seed and dealt round-robin into k folds.
FoldPlan group_kfold_split(const std::vector<std::string>& groups, int k,
                           std::uint64_t seed);

double rmse_per_sample(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// Rank correlation with averaged ranks for ties; nullopt when either input
// has zero rank variance.
std::optional<double> spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

std::vector<SampleRecord> run_setup(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const std::vector<std::string>& groups,
                                    const std::vector<int>& spots, const FoldPlan& plan,
                                    SetupKind kind, const HarnessConfig& cfg,
                                    std::vector<FoldModels>* fitted = nullptr);

// Train folds use the first encoding, validation folds the second (drifted)
// one. Both must list the same groups in the same row order.
std::vector<SampleRecord> run_cross_dataset(const EncodedDataset& train_enc,
                                            const EncodedDataset& valid_enc,
                                            const FoldPlan& plan, SetupKind kind,
                                            const HarnessConfig& cfg,
                                            std::vector<FoldModels>* fitted = nullptr);

// Thresholds: -inf followed by n evenly spaced values across the observed
// decision-score span. rmse_accepted pools the accepted samples' channels.
TradeoffCurve tradeoff_curve(const std::vector<SampleRecord>& records,
                             int n_thresholds = 201);

// Pointwise mean on a common 101-point coverage grid (linear interpolation
// of each fold's coverage -> rmse curve). Output thresholds are NaN.
TradeoffCurve fold_average_curves(const std::vector<TradeoffCurve>& curves);

}  // namespace tcage
