#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tcage/harness.hpp"

namespace tcage {

// (setup name, payload) pairs, written/read in order
using SetupRecords = std::vector<std::pair<std::string, std::vector<SampleRecord>>>;
using SetupCurves = std::vector<std::pair<std::string, TradeoffCurve>>;

void write_records_csv(const SetupRecords& by_setup, const std::filesystem::path& path);
void write_tradeoff_csv(const SetupCurves& by_setup, const std::filesystem::path& path);

// Parse errors report the 1-based line number.
SetupRecords read_records_csv(const std::filesystem::path& path);
SetupCurves read_tradeoff_csv(const std::filesystem::path& path);

// coverage,rmse pairs of an averaged curve
void write_curve_csv(const TradeoffCurve& curve, const std::filesystem::path& path);

}  // namespace tcage
