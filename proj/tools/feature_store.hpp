#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "pikan/dataset.hpp"

namespace pikan::cli {

// Layout on disk:
//   <store>/manifest.json        stats, indicator params, checksums
//   <store>/features/<id>.csv    date, valid, close_raw, 18 normalized features
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kManifestFormat = "pikan-features";
inline constexpr int kManifestVersion = 1;

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Parses every asset file before touching the store, then writes into a
// sibling temporary directory and swaps it in, so a failure leaves no
// partial manifest behind. Returns the manifest.
nlohmann::json build_feature_store(const ExperimentConfig& config);

// Verifies checksums and that the store matches the configured assets and
// normalization range, then rebuilds the dataset.
marketdata::Dataset load_feature_store(const ExperimentConfig& config);

// Serialization of one asset's feature file, exposed for tests.
std::string feature_csv(const marketdata::FeatureMatrix& normalized, const std::vector<double>& closes);

}  // namespace pikan::cli
