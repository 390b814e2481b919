#include "tcage/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tcage/explain.hpp"
#include "tcage/parallel.hpp"
#include "tcage/rng.hpp"

namespace tcage {

int FoldPlan::fold_of(const std::string& group) const {
    auto it = assignments.find(group);
    if (it == assignments.end())
        throw std::invalid_argument("group not in fold plan: " + group);
    return it->second;
}

const char* setup_name(SetupKind kind) {
    switch (kind) {
        case SetupKind::X: return "x";
        case SetupKind::YTrue: return "y_true";
        case SetupKind::XShap: return "x_shap";
    }
    return "?";
}

SetupKind setup_from_name(const std::string& name) {
    if (name == "x") return SetupKind::X;
    if (name == "y_true") return SetupKind::YTrue;
    if (name == "x_shap") return SetupKind::XShap;
    throw std::invalid_argument("unknown setup: " + name);
}

FoldPlan group_kfold_split(const std::vector<std::string>& groups, int k,
                           std::uint64_t seed) {
    std::vector<std::string> distinct;
    std::set<std::string> seen;
    for (const auto& g : groups)
        if (seen.insert(g).second) distinct.push_back(g);
    if (static_cast<int>(distinct.size()) < k)
        throw std::invalid_argument("fewer distinct groups than folds");

    Rng rng(derive_seed(seed, 0xF0));
    for (std::size_t i = distinct.size(); i > 1; --i)
        std::swap(distinct[i - 1], distinct[rng.uniform_index(i)]);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    for (std::size_t i = 0; i < distinct.size(); ++i)
        plan.assignments[distinct[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return plan;
}

double rmse_per_sample(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("rmse length mismatch");
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

namespace {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
    const auto n = v.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
    Eigen::VectorXd ranks(n);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman length mismatch");
    if (a.size() < 3) throw std::invalid_argument("spearman needs at least 3 values");
    Eigen::VectorXd ra = average_ranks(a);
    Eigen::VectorXd rb = average_ranks(b);
    Eigen::VectorXd ca = ra.array() - ra.mean();
    Eigen::VectorXd cb = rb.array() - rb.mean();
    double na = ca.norm();
    double nb = cb.norm();
    if (na == 0.0 || nb == 0.0) return std::nullopt;
    return ca.dot(cb) / (na * nb);
}

namespace {

struct FoldOutput {
    std::vector<SampleRecord> records;
    FoldModels models;
};

// One fold of the generic (possibly cross-dataset) run. Everything is fit on
// train rows only; validation rows come from the second encoding.
FoldOutput run_fold(const Eigen::MatrixXd& trainX_all, const Eigen::MatrixXd& trainY_all,
                    const Eigen::MatrixXd& validX_all, const Eigen::MatrixXd& validY_all,
                    const std::vector<std::string>& groups, const std::vector<int>& spots,
                    const FoldPlan& plan, int fold, SetupKind kind,
                    const HarnessConfig& cfg) {
    const auto n = trainX_all.rows();
    std::vector<Eigen::Index> train_idx, valid_idx;
    std::set<std::string> train_groups;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (plan.fold_of(groups[static_cast<std::size_t>(i)]) == fold) {
            valid_idx.push_back(i);
        } else {
            train_idx.push_back(i);
            train_groups.insert(groups[static_cast<std::size_t>(i)]);
        }
    }
    if (train_groups.size() < 2)
        throw std::invalid_argument("fold has fewer than 2 training groups");

    auto take = [](const Eigen::MatrixXd& M, const std::vector<Eigen::Index>& idx) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), M.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(idx[i]);
        return out;
    };

    Eigen::MatrixXd Xtr = take(trainX_all, train_idx);
    Eigen::MatrixXd Ytr = take(trainY_all, train_idx);
    Eigen::MatrixXd Xva = take(validX_all, valid_idx);
    Eigen::MatrixXd Yva = take(validY_all, valid_idx);

    FoldOutput out;
    out.models.input_standardizer = fit_standardizer(Xtr);
    Eigen::MatrixXd Xs_tr = out.models.input_standardizer.transform(Xtr);
    Eigen::MatrixXd Xs_va = out.models.input_standardizer.transform(Xva);

    out.models.ridge = ridge_fit(Xs_tr, Ytr, cfg.ridge_alpha);
    Eigen::MatrixXd Ypred = out.models.ridge.predict(Xs_va);

    // the space the Isolation Forest models, per setup
    Eigen::MatrixXd space_tr, space_va;
    switch (kind) {
        case SetupKind::X:
            space_tr = std::move(Xs_tr);
            space_va = Xs_va;
            break;
        case SetupKind::YTrue:
            // models the training targets; validation side scores the
            // predictions, to flag outputs unlike anything seen in training
            space_tr = Ytr;
            space_va = Ypred;
            break;
        case SetupKind::XShap: {
            space_tr.resize(Xs_tr.rows(), Xs_tr.cols());
            for (Eigen::Index i = 0; i < Xs_tr.rows(); ++i)
                space_tr.row(i) = reduced_shap(out.models.ridge, Xs_tr.row(i).transpose()).transpose();
            space_va.resize(Xs_va.rows(), Xs_va.cols());
            for (Eigen::Index i = 0; i < Xs_va.rows(); ++i)
                space_va.row(i) = reduced_shap(out.models.ridge, Xs_va.row(i).transpose()).transpose();
            break;
        }
    }

    out.models.anomaly_standardizer = fit_standardizer(space_tr);
    Eigen::MatrixXd Zs_tr = out.models.anomaly_standardizer.transform(space_tr);
    Eigen::MatrixXd Zs_va = out.models.anomaly_standardizer.transform(space_va);

    int k = std::min<int>(cfg.pca_k,
                          std::min<int>(static_cast<int>(Zs_tr.rows()) - 1,
                                        static_cast<int>(Zs_tr.cols())));
    out.models.pca = pca_fit(Zs_tr, k);
    Eigen::MatrixXd Ptr = out.models.pca.transform(Zs_tr);
    Eigen::MatrixXd Pva = out.models.pca.transform(Zs_va);

    std::uint64_t if_seed = derive_seed(cfg.seed, 0x5A + static_cast<std::uint64_t>(kind),
                                        static_cast<std::uint64_t>(fold));
    out.models.iforest = iforest_fit(Ptr, cfg.iforest_trees, cfg.iforest_psi, if_seed);
    Eigen::VectorXd scores = decision_scores(out.models.iforest, Pva);

    out.records.reserve(valid_idx.size());
    for (std::size_t i = 0; i < valid_idx.size(); ++i) {
        SampleRecord r;
        r.planet_id = groups[static_cast<std::size_t>(valid_idx[i])];
        r.spot_config_index = spots[static_cast<std::size_t>(valid_idx[i])];
        r.fold = fold;
        r.decision_score = scores[static_cast<Eigen::Index>(i)];
        r.prediction = Ypred.row(static_cast<Eigen::Index>(i)).transpose();
        r.rmse = rmse_per_sample(r.prediction, Yva.row(static_cast<Eigen::Index>(i)).transpose());
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<SampleRecord> run_generic(const Eigen::MatrixXd& trainX, const Eigen::MatrixXd& trainY,
                                      const Eigen::MatrixXd& validX, const Eigen::MatrixXd& validY,
                                      const std::vector<std::string>& groups,
                                      const std::vector<int>& spots, const FoldPlan& plan,
                                      SetupKind kind, const HarnessConfig& cfg,
                                      std::vector<FoldModels>* fitted) {
    std::vector<FoldOutput> outputs(static_cast<std::size_t>(plan.k));
    parallel_for(static_cast<std::size_t>(plan.k), cfg.threads, [&](std::size_t f) {
        outputs[f] = run_fold(trainX, trainY, validX, validY, groups, spots, plan,
                              static_cast<int>(f), kind, cfg);
    });
    std::vector<SampleRecord> records;
    if (fitted) fitted->clear();
    for (auto& o : outputs) {
        for (auto& r : o.records) records.push_back(std::move(r));
        if (fitted) fitted->push_back(std::move(o.models));
    }
    return records;
}

}  // namespace

std::vector<SampleRecord> run_setup(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const std::vector<std::string>& groups,
                                    const std::vector<int>& spots, const FoldPlan& plan,
                                    SetupKind kind, const HarnessConfig& cfg,
                                    std::vector<FoldModels>* fitted) {
    if (X.rows() != Y.rows() || static_cast<std::size_t>(X.rows()) != groups.size() ||
        groups.size() != spots.size())
        throw std::invalid_argument("run_setup: inconsistent shapes");
    return run_generic(X, Y, X, Y, groups, spots, plan, kind, cfg, fitted);
}

std::vector<SampleRecord> run_cross_dataset(const EncodedDataset& train_enc,
                                            const EncodedDataset& valid_enc,
                                            const FoldPlan& plan, SetupKind kind,
                                            const HarnessConfig& cfg,
                                            std::vector<FoldModels>* fitted) {
    if (train_enc.groups != valid_enc.groups)
        throw std::invalid_argument("run_cross_dataset: planet ids differ between encodings");
    if (train_enc.X.cols() != valid_enc.X.cols() || train_enc.Y.cols() != valid_enc.Y.cols())
        throw std::invalid_argument("run_cross_dataset: dimension mismatch");
    return run_generic(train_enc.X, train_enc.Y, valid_enc.X, valid_enc.Y,
                       train_enc.groups, train_enc.spots, plan, kind, cfg, fitted);
}

static TradeoffCurve tradeoffs_impl(const std::vector<SampleRecord>& records,
                                    const std::vector<double>& thresholds) {
    TradeoffCurve curve;
    for (double th : thresholds) {
        TradeoffPoint p;
        p.threshold = th;
        std::size_t accepted = 0;
        double mse_sum = 0.0;
        for (const auto& r : records) {
            if (r.decision_score >= th) {
                ++accepted;
                mse_sum += r.rmse * r.rmse;
            }
        }
        p.coverage = static_cast<double>(accepted) / static_cast<double>(records.size());
        if (accepted > 0)
            p.rmse_accepted = std::sqrt(mse_sum / static_cast<double>(accepted));
        curve.points.push_back(p);
    }
    return curve;
}

TradeoffCurve tradeoff_curve(const std::vector<SampleRecord>& records, int n_thresholds) {
    if (records.empty()) throw std::invalid_argument("tradeoff_curve: no records");
    if (n_thresholds < 1) throw std::invalid_argument("tradeoff_curve: n_thresholds < 1");
    double lo = records[0].decision_score, hi = lo;
    for (const auto& r : records) {
        lo = std::min(lo, r.decision_score);
        hi = std::max(hi, r.decision_score);
    }
    std::vector<double> thresholds;
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < n_thresholds; ++i) {
        double f = n_thresholds == 1 ? 0.0
                                     : static_cast<double>(i) / static_cast<double>(n_thresholds - 1);
        thresholds.push_back(lo + f * (hi - lo));
    }
    return tradeoffs_impl(records, thresholds);
}

TradeoffCurve fold_average_curves(const std::vector<TradeoffCurve>& curves) {
    if (curves.empty()) throw std::invalid_argument("fold_average_curves: no curves");
    constexpr int kGrid = 101;

    auto resample = [](const TradeoffCurve& c) {
        std::vector<std::pair<double, double>> pts;  // coverage -> rmse
        for (const auto& p : c.points)
            if (p.rmse_accepted) pts.emplace_back(p.coverage, *p.rmse_accepted);
        if (pts.empty()) throw std::invalid_argument("fold_average_curves: empty curve");
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [](const auto& a, const auto& b) { return a.first == b.first; }),
                  pts.end());
        std::vector<double> out(kGrid);
        for (int i = 0; i < kGrid; ++i) {
            double cov = static_cast<double>(i) / (kGrid - 1);
            if (cov <= pts.front().first) {
                out[i] = pts.front().second;
            } else if (cov >= pts.back().first) {
                out[i] = pts.back().second;
            } else {
                auto it = std::lower_bound(pts.begin(), pts.end(),
                                           std::make_pair(cov, -1.0));
                auto prev = std::prev(it);
                double span = it->first - prev->first;
                double w = span > 0.0 ? (cov - prev->first) / span : 0.0;
                out[i] = prev->second + w * (it->second - prev->second);
            }
        }
        return out;
    };

    std::vector<double> mean(kGrid, 0.0);
    for (const auto& c : curves) {
        auto r = resample(c);
        for (int i = 0; i < kGrid; ++i) mean[i] += r[i];
    }
    TradeoffCurve out;
    for (int i = 0; i < kGrid; ++i) {
        TradeoffPoint p;
        p.threshold = std::numeric_limits<double>::quiet_NaN();
        p.coverage = static_cast<double>(i) / (kGrid - 1);
        p.rmse_accepted = mean[i] / static_cast<double>(curves.size());
        out.points.push_back(p);
    }
    return out;
}

}  // namespace tcage
