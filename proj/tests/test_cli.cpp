#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "tcage/dataset.hpp"
#include "tcage/reporting.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = TCAGE_CLI_PATH;

fs::path work_dir() {
    fs::path d = fs::temp_directory_path() / "tcage_test_cli";
    fs::create_directories(d);
    return d;
}

int run_cmd(const std::string& args, const fs::path& log) {
    std::string cmd = std::string(kCli) + " " + args + " >" + log.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("generate writes a loadable, reproducible dataset") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";

    CHECK(run_cmd("generate --planets 2 --seed 1 --out " + (dir / "d.bin").string(), log) == 0);
    tcage::Dataset ds = tcage::load_dataset(dir / "d.bin");
    CHECK(ds.blocks.size() == 200);

    CHECK(run_cmd("generate --planets 2 --seed 1 --out " + (dir / "d2.bin").string(), log) == 0);
    CHECK(slurp(dir / "d.bin") == slurp(dir / "d2.bin"));
}

TEST_CASE("usage errors exit with code 2") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";
    CHECK(run_cmd("generate --planets 2 --seed 1", log) == 2);  // missing --out
    CHECK(run_cmd("frobnicate", log) == 2);
}

TEST_CASE("run produces records, tradeoffs and metadata; reruns are byte-identical") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";
    fs::path data = dir / "run_data.bin";
    REQUIRE(run_cmd("generate --planets 12 --seed 3 --out " + data.string(), log) == 0);

    std::string base = "run --dataset " + data.string() + " --folds 4 --seed 5";
    fs::path out1 = dir / "out1";
    fs::path out2 = dir / "out2";
    REQUIRE(run_cmd(base + " --threads 1 --out-dir " + out1.string(), log) == 0);
    std::string stdout_text = slurp(log);
    CHECK(stdout_text.find("spearman") != std::string::npos);
    REQUIRE(run_cmd(base + " --threads 4 --out-dir " + out2.string(), log) == 0);

    CHECK(fs::exists(out1 / "meta.json"));
    CHECK(slurp(out1 / "records.csv") == slurp(out2 / "records.csv"));
    CHECK(slurp(out1 / "tradeoff.csv") == slurp(out2 / "tradeoff.csv"));

    tcage::SetupRecords records = tcage::read_records_csv(out1 / "records.csv");
    REQUIRE(records.size() == 3);
    std::size_t total = 0;
    for (const auto& [name, recs] : records) {
        CHECK(recs.size() == 120);
        total += recs.size();
    }
    CHECK(total == 360);

    SUBCASE("setup filter restricts the record table") {
        fs::path out3 = dir / "out3";
        REQUIRE(run_cmd(base + " --setups x_shap --out-dir " + out3.string(), log) == 0);
        tcage::SetupRecords filtered = tcage::read_records_csv(out3 / "records.csv");
        REQUIRE(filtered.size() == 1);
        CHECK(filtered[0].first == "x_shap");
    }

    SUBCASE("report summarizes the outputs") {
        REQUIRE(run_cmd("report --records " + (out1 / "records.csv").string() +
                            " --tradeoff " + (out1 / "tradeoff.csv").string() +
                            " --threshold 0.0 --out-dir " + (dir / "rep").string(),
                        log) == 0);
        std::string text = slurp(log);
        CHECK(text.find("threshold +0.0000") != std::string::npos);
        CHECK(text.find("coverage>=98%") != std::string::npos);
        CHECK(fs::exists(dir / "rep" / "curve_x.csv"));
        CHECK(fs::exists(dir / "rep" / "curve_x_shap.csv"));
    }

    SUBCASE("config file supplies defaults, flags win") {
        std::ofstream cfg(dir / "run.json");
        cfg << "{\"dataset\": \"" << data.string() << "\", \"folds\": 4, \"seed\": 5, "
            << "\"setups\": \"x\"}\n";
        cfg.close();
        fs::path out4 = dir / "out4";
        REQUIRE(run_cmd("run --config " + (dir / "run.json").string() + " --out-dir " +
                            out4.string(),
                        log) == 0);
        tcage::SetupRecords recs = tcage::read_records_csv(out4 / "records.csv");
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].first == "x");
    }
}

TEST_CASE("run failures leave no partial outputs") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";
    fs::path out = dir / "fail_out";
    CHECK(run_cmd("run --dataset " + (dir / "missing.bin").string() + " --out-dir " +
                      out.string(),
                  log) == 1);
    CHECK(!fs::exists(out / "records.csv"));
    CHECK(!fs::exists(out / "meta.json"));
}

TEST_CASE("report rejects malformed and empty inputs") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";
    std::ofstream empty(dir / "empty.csv");
    empty << "setup,fold,planet_id,spot,decision_score,rmse\n";
    empty.close();
    CHECK(run_cmd("report --records " + (dir / "empty.csv").string(), log) == 1);
    std::string text = slurp(log);
    CHECK(text.find("no records") != std::string::npos);

    std::ofstream bad(dir / "bad.csv");
    bad << "setup,fold,planet_id,spot,decision_score,rmse\nx,nope,P,0,0.1,0.1\n";
    bad.close();
    CHECK(run_cmd("report --records " + (dir / "bad.csv").string(), log) == 1);
    text = slurp(log);
    CHECK(text.find(":2:") != std::string::npos);
}
