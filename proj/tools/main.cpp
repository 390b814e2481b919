#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tcage/dataset.hpp"
#include "tcage/encode.hpp"
#include "tcage/explain.hpp"
#include "tcage/harness.hpp"
#include "tcage/reporting.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct GenerateOptions {
    int planets = 0;
    int length = 300;
    std::uint64_t seed = 0;
    std::string out;
    std::string csv_dir;
};

struct RunOptions {
    std::string config;
    std::string dataset;
    std::string out_dir;
    std::string setups = "x,y_true,x_shap";
    double alpha = 1.0;
    int pca_k = 30;
    int trees = 100;
    int psi = 0;
    int folds = 0;  // 0: 10 for clean runs, 5 for drift runs
    int thresholds = 201;
    std::uint64_t seed = 0;
    int threads = 0;
    double drift_gain = 0.0;
    double drift_red = 0.0;
    double drift_target_sigma = 0.0;
    std::uint64_t drift_seed = 0;
    std::string export_encoding;
    std::string export_shap;
};

struct ReportOptions {
    std::string records;
    std::string tradeoff;
    std::vector<double> thresholds;
    std::string out_dir;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_generate(const GenerateOptions& opt) {
    tcage::Dataset ds = tcage::generate_synthetic_dataset(opt.planets, opt.length, opt.seed);
    tcage::save_dataset(ds, opt.out);
    if (!opt.csv_dir.empty()) tcage::export_dataset_csv(ds, opt.csv_dir);
    std::cout << "wrote " << opt.out << " (" << ds.planets.size() << " planets, "
              << ds.blocks.size() << " blocks)\n";
    return 0;
}

// Fill options the user did not pass on the command line from the config file.
void merge_config(CLI::App* cmd, RunOptions& opt) {
    if (opt.config.empty()) return;
    std::ifstream is(opt.config);
    if (!is) throw std::runtime_error("cannot read config " + opt.config);
    json cfg = json::parse(is);
    auto set = [&](const char* flag, auto& field) {
        using T = std::decay_t<decltype(field)>;
        const char* key = flag + 2;  // strip "--"
        if (cmd->count(flag) == 0 && cfg.contains(key)) field = cfg.at(key).get<T>();
    };
    set("--dataset", opt.dataset);
    set("--out-dir", opt.out_dir);
    set("--setups", opt.setups);
    set("--alpha", opt.alpha);
    set("--pca-k", opt.pca_k);
    set("--trees", opt.trees);
    set("--psi", opt.psi);
    set("--folds", opt.folds);
    set("--thresholds", opt.thresholds);
    set("--seed", opt.seed);
    set("--threads", opt.threads);
    set("--drift-gain", opt.drift_gain);
    set("--drift-red", opt.drift_red);
    set("--drift-target-sigma", opt.drift_target_sigma);
    set("--drift-seed", opt.drift_seed);
}

int cmd_run(const RunOptions& opt) {
    if (opt.dataset.empty()) throw CLI::ValidationError("--dataset is required");
    if (opt.out_dir.empty()) throw CLI::ValidationError("--out-dir is required");

    fs::create_directories(opt.out_dir);
    fs::path records_path = fs::path(opt.out_dir) / "records.csv";
    fs::path tradeoff_path = fs::path(opt.out_dir) / "tradeoff.csv";
    fs::path meta_path = fs::path(opt.out_dir) / "meta.json";

    auto cleanup = [&] {
        std::error_code ec;
        fs::remove(records_path, ec);
        fs::remove(tradeoff_path, ec);
        fs::remove(meta_path, ec);
    };

    try {
        std::vector<std::string> setup_names = split_list(opt.setups);
        if (setup_names.empty()) throw std::runtime_error("no setups selected");
        for (const auto& s : setup_names) tcage::setup_from_name(s);  // validate early

        bool drift = opt.drift_gain > 0.0 || opt.drift_red > 0.0 ||
                     opt.drift_target_sigma > 0.0;
        int k = opt.folds > 0 ? opt.folds : (drift ? 5 : 10);

        tcage::Dataset ds = tcage::load_dataset(opt.dataset);
        tcage::EncodingConfig enc_cfg;
        tcage::EncodedDataset enc = tcage::encode_dataset(ds, enc_cfg, opt.threads);
        if (!opt.export_encoding.empty())
            tcage::export_encoded_csv(enc, enc_cfg, opt.export_encoding);

        std::optional<tcage::EncodedDataset> drifted;
        if (drift) {
            tcage::DriftConfig dc{opt.drift_gain, opt.drift_red, opt.drift_target_sigma,
                                  opt.drift_seed};
            drifted = tcage::encode_dataset(tcage::inject_drift(ds, dc), enc_cfg, opt.threads);
        }

        tcage::FoldPlan plan = tcage::group_kfold_split(enc.groups, k, opt.seed);
        tcage::HarnessConfig hcfg;
        hcfg.ridge_alpha = opt.alpha;
        hcfg.pca_k = opt.pca_k;
        hcfg.iforest_trees = opt.trees;
        hcfg.iforest_psi = opt.psi;
        hcfg.seed = opt.seed;
        hcfg.threads = opt.threads;

        tcage::SetupRecords all_records;
        tcage::SetupCurves all_curves;
        for (const auto& name : setup_names) {
            tcage::SetupKind kind = tcage::setup_from_name(name);
            std::vector<tcage::SampleRecord> records =
                drift ? tcage::run_cross_dataset(enc, *drifted, plan, kind, hcfg)
                      : tcage::run_setup(enc.X, enc.Y, enc.groups, enc.spots, plan, kind, hcfg);
            tcage::TradeoffCurve curve = tcage::tradeoff_curve(records, opt.thresholds);

            Eigen::VectorXd neg_scores(records.size()), rmses(records.size());
            double mse = 0.0;
            for (std::size_t i = 0; i < records.size(); ++i) {
                neg_scores[static_cast<Eigen::Index>(i)] = -records[i].decision_score;
                rmses[static_cast<Eigen::Index>(i)] = records[i].rmse;
                mse += records[i].rmse * records[i].rmse;
            }
            double full_rmse = std::sqrt(mse / static_cast<double>(records.size()));
            auto rho = tcage::spearman(neg_scores, rmses);
            std::printf("setup %-7s rmse %.6f  spearman(-score, rmse) %s\n", name.c_str(),
                        full_rmse, rho ? std::to_string(*rho).c_str() : "degenerate");

            all_records.emplace_back(name, std::move(records));
            all_curves.emplace_back(name, std::move(curve));
        }

        tcage::write_records_csv(all_records, records_path);
        tcage::write_tradeoff_csv(all_curves, tradeoff_path);

        if (!opt.export_shap.empty()) {
            // full-data fit, audit dump of the reduced SHAP vectors
            tcage::Standardizer sx = tcage::fit_standardizer(enc.X);
            Eigen::MatrixXd Xs = sx.transform(enc.X);
            tcage::RidgeModel ridge = tcage::ridge_fit(Xs, enc.Y, opt.alpha);
            std::ofstream os(opt.export_shap);
            if (!os) throw std::runtime_error("cannot write " + opt.export_shap);
            os << "planet_id,spot";
            char h[16];
            for (int i = 0; i < enc.X.cols(); ++i) {
                std::snprintf(h, sizeof(h), ",s%03d", i);
                os << h;
            }
            os << "\n";
            char buf[40];
            for (Eigen::Index r = 0; r < Xs.rows(); ++r) {
                Eigen::VectorXd v = tcage::reduced_shap(ridge, Xs.row(r).transpose());
                os << enc.groups[static_cast<std::size_t>(r)] << ','
                   << enc.spots[static_cast<std::size_t>(r)];
                for (Eigen::Index i = 0; i < v.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
                    os << ',' << buf;
                }
                os << "\n";
            }
        }

        json meta;
        meta["dataset"] = opt.dataset;
        meta["out-dir"] = opt.out_dir;
        meta["setups"] = opt.setups;
        meta["alpha"] = opt.alpha;
        meta["pca-k"] = opt.pca_k;
        meta["trees"] = opt.trees;
        meta["psi"] = opt.psi;
        meta["folds"] = k;
        meta["thresholds"] = opt.thresholds;
        meta["seed"] = opt.seed;
        meta["threads"] = opt.threads;
        meta["drift-gain"] = opt.drift_gain;
        meta["drift-red"] = opt.drift_red;
        meta["drift-target-sigma"] = opt.drift_target_sigma;
        meta["drift-seed"] = opt.drift_seed;
        meta["encoding"] = {{"grid_start", 100}, {"grid_end", 150}, {"grid_step", 5},
                            {"window_radius", 10}};
        meta["assumptions"] = {
            "isolation forest defaults: 100 trees, subsample min(256,n), depth cap ceil(log2(psi)), offset -0.5",
            "ridge alpha 1.0 with unpenalized intercept; targets not standardized",
            "y_true setup scores validation predictions",
            "threshold ties accepted (score >= threshold)"};
        std::ofstream os(meta_path);
        os << meta.dump(2) << "\n";
    } catch (...) {
        cleanup();
        throw;
    }
    return 0;
}

int cmd_report(const ReportOptions& opt) {
    tcage::SetupRecords by_setup = tcage::read_records_csv(opt.records);
    bool any = false;
    for (const auto& [name, records] : by_setup) any = any || !records.empty();
    if (!any) throw std::runtime_error("no records in " + opt.records);

    tcage::SetupCurves curves;
    if (!opt.tradeoff.empty()) curves = tcage::read_tradeoff_csv(opt.tradeoff);

    std::vector<double> thresholds = opt.thresholds;
    if (thresholds.empty()) thresholds.push_back(0.0);

    for (const auto& [name, records] : by_setup) {
        Eigen::VectorXd neg_scores(records.size()), rmses(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            neg_scores[static_cast<Eigen::Index>(i)] = -records[i].decision_score;
            rmses[static_cast<Eigen::Index>(i)] = records[i].rmse;
        }
        auto rho = tcage::spearman(neg_scores, rmses);
        std::printf("setup %-7s n=%zu  spearman(-score, rmse) %s\n", name.c_str(),
                    records.size(), rho ? std::to_string(*rho).c_str() : "degenerate");

        for (double th : thresholds) {
            std::size_t accepted = 0;
            double mse = 0.0;
            for (const auto& r : records)
                if (r.decision_score >= th) {
                    ++accepted;
                    mse += r.rmse * r.rmse;
                }
            double coverage = static_cast<double>(accepted) / static_cast<double>(records.size());
            if (accepted > 0)
                std::printf("  threshold %+.4f  coverage %.4f  rmse %.6f\n", th, coverage,
                            std::sqrt(mse / static_cast<double>(accepted)));
            else
                std::printf("  threshold %+.4f  coverage 0.0000  rmse n/a\n", th);
        }

        for (const auto& [cname, curve] : curves) {
            if (cname != name) continue;
            // highest threshold still keeping >= 98% coverage
            const tcage::TradeoffPoint* best = nullptr;
            for (const auto& p : curve.points)
                if (p.coverage >= 0.98 && (!best || p.threshold > best->threshold)) best = &p;
            if (best && best->rmse_accepted)
                std::printf("  coverage>=98%%: threshold %+.4f  coverage %.4f  rmse %.6f\n",
                            best->threshold, best->coverage, *best->rmse_accepted);
        }

        if (!opt.out_dir.empty()) {
            // per-fold curves, averaged on the common coverage grid
            std::map<int, std::vector<tcage::SampleRecord>> folds;
            for (const auto& r : records) folds[r.fold].push_back(r);
            std::vector<tcage::TradeoffCurve> fold_curves;
            for (const auto& [fold, recs] : folds)
                fold_curves.push_back(tcage::tradeoff_curve(recs, 201));
            fs::create_directories(opt.out_dir);
            tcage::write_curve_csv(tcage::fold_average_curves(fold_curves),
                                   fs::path(opt.out_dir) / ("curve_" + name + ".csv"));
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transit light-curve encoder, Ridge predictor and Isolation Forest "
                 "safety cage with coverage/error trade-off sweeps"};
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* cmd_gen = app.add_subcommand("generate", "write a synthetic dataset file");
    cmd_gen->add_option("--planets", gen.planets, "number of star/planet systems")->required();
    cmd_gen->add_option("--length", gen.length, "time series length (even, >= 200)");
    cmd_gen->add_option("--seed", gen.seed, "generation seed");
    cmd_gen->add_option("--out", gen.out, "output dataset path")->required();
    cmd_gen->add_option("--csv-dir", gen.csv_dir, "also export params.csv/targets.csv here");

    RunOptions run;
    auto* cmd_r = app.add_subcommand("run", "encode a dataset and run the CV setups");
    cmd_r->add_option("--config", run.config, "JSON config; explicit flags win");
    cmd_r->add_option("--dataset", run.dataset, "dataset file");
    cmd_r->add_option("--out-dir", run.out_dir, "output directory");
    cmd_r->add_option("--setups", run.setups, "comma list of x,y_true,x_shap");
    cmd_r->add_option("--alpha", run.alpha, "ridge L2 strength");
    cmd_r->add_option("--pca-k", run.pca_k, "PCA projection dimension");
    cmd_r->add_option("--trees", run.trees, "isolation forest tree count");
    cmd_r->add_option("--psi", run.psi, "isolation forest subsample size (0: min(256,n))");
    cmd_r->add_option("--folds", run.folds, "CV folds (0: 10 clean, 5 drifted)");
    cmd_r->add_option("--thresholds", run.thresholds, "threshold sweep resolution");
    cmd_r->add_option("--seed", run.seed, "CV and model seed");
    cmd_r->add_option("--threads", run.threads, "worker threads (0: all cores)");
    cmd_r->add_option("--drift-gain", run.drift_gain, "drift: gain nonlinearity strength");
    cmd_r->add_option("--drift-red", run.drift_red, "drift: AR(1) red-noise amplitude");
    cmd_r->add_option("--drift-target-sigma", run.drift_target_sigma,
                      "drift: target perturbation sigma");
    cmd_r->add_option("--drift-seed", run.drift_seed, "drift seed");
    cmd_r->add_option("--export-encoding", run.export_encoding, "also write encoded CSV here");
    cmd_r->add_option("--export-shap", run.export_shap, "also write reduced SHAP CSV here");

    ReportOptions rep;
    auto* cmd_rep = app.add_subcommand("report", "summarize record/trade-off CSVs");
    cmd_rep->add_option("--records", rep.records, "records.csv path")->required();
    cmd_rep->add_option("--tradeoff", rep.tradeoff, "tradeoff.csv path");
    cmd_rep->add_option("--threshold", rep.thresholds, "operating thresholds to report");
    cmd_rep->add_option("--out-dir", rep.out_dir, "write fold-averaged curve CSVs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (cmd_gen->parsed()) return cmd_generate(gen);
        if (cmd_r->parsed()) {
            merge_config(cmd_r, run);
            return cmd_run(run);
        }
        if (cmd_rep->parsed()) return cmd_report(rep);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
