#pragma once

#include <filesystem>

#include "tcage/iforest.hpp"
#include "tcage/linmodel.hpp"

namespace tcage {

// Versioned persistence: `<base>.json` holds metadata, `<base>.bin` holds a
// little-endian float64 payload whose section layout the JSON documents.

void save_model(const Standardizer& m, const std::filesystem::path& base);
void save_model(const RidgeModel& m, const std::filesystem::path& base);
void save_model(const PcaModel& m, const std::filesystem::path& base);
void save_model(const IsolationForestModel& m, const std::filesystem::path& base);

Standardizer load_standardizer(const std::filesystem::path& base);
RidgeModel load_ridge(const std::filesystem::path& base);
PcaModel load_pca(const std::filesystem::path& base);
IsolationForestModel load_iforest(const std::filesystem::path& base);

}  // namespace tcage
