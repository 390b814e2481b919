#include "tcage/reporting.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcage {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        parse_fail(path, line, "not a number: '" + s + "'");
    }
}

int to_int(const std::string& s, const std::filesystem::path& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        parse_fail(path, line, "not an integer: '" + s + "'");
    }
}

}  // namespace

void write_records_csv(const SetupRecords& by_setup, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "setup,fold,planet_id,spot,decision_score,rmse\n";
    for (const auto& [setup, records] : by_setup)
        for (const auto& r : records)
            os << setup << ',' << r.fold << ',' << r.planet_id << ','
               << r.spot_config_index << ',' << fmt(r.decision_score) << ','
               << fmt(r.rmse) << "\n";
}

void write_tradeoff_csv(const SetupCurves& by_setup, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "setup,threshold,coverage,rmse_accepted\n";
    for (const auto& [setup, curve] : by_setup)
        for (const auto& p : curve.points) {
            os << setup << ',' << fmt(p.threshold) << ',' << fmt(p.coverage) << ',';
            if (p.rmse_accepted) os << fmt(*p.rmse_accepted);
            os << "\n";
        }
}

SetupRecords read_records_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) parse_fail(path, 1, "empty file");
    ++lineno;
    if (line != "setup,fold,planet_id,spot,decision_score,rmse")
        parse_fail(path, 1, "unexpected header");
    SetupRecords out;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 6) parse_fail(path, lineno, "expected 6 fields");
        SampleRecord r;
        r.fold = to_int(f[1], path, lineno);
        r.planet_id = f[2];
        r.spot_config_index = to_int(f[3], path, lineno);
        r.decision_score = to_double(f[4], path, lineno);
        r.rmse = to_double(f[5], path, lineno);
        if (out.empty() || out.back().first != f[0]) out.emplace_back(f[0], std::vector<SampleRecord>{});
        out.back().second.push_back(std::move(r));
    }
    return out;
}

SetupCurves read_tradeoff_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) parse_fail(path, 1, "empty file");
    ++lineno;
    if (line != "setup,threshold,coverage,rmse_accepted")
        parse_fail(path, 1, "unexpected header");
    SetupCurves out;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 4) parse_fail(path, lineno, "expected 4 fields");
        TradeoffPoint p;
        p.threshold = to_double(f[1], path, lineno);
        p.coverage = to_double(f[2], path, lineno);
        if (!f[3].empty()) p.rmse_accepted = to_double(f[3], path, lineno);
        if (out.empty() || out.back().first != f[0]) out.emplace_back(f[0], TradeoffCurve{});
        out.back().second.points.push_back(p);
    }
    return out;
}

void write_curve_csv(const TradeoffCurve& curve, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "coverage,rmse\n";
    for (const auto& p : curve.points) {
        os << fmt(p.coverage) << ',';
        if (p.rmse_accepted) os << fmt(*p.rmse_accepted);
        os << "\n";
    }
}

}  // namespace tcage
