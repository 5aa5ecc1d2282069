#pragma once

#include "fasteit/config.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fasteit {

inline constexpr int kResultFormatVersion = 1;

struct Provenance {
    std::string code_version;
    std::string timestamp;  // ISO 8601 UTC; not covered by the checksum
    bool operator==(const Provenance&) const = default;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<double> time_axis;
    std::vector<double> intensity;
    std::vector<double> filtered_intensity;  // empty when no filter ran
    std::map<std::string, double> metrics;
    Provenance provenance;
    bool operator==(const RunResult&) const = default;
};

Provenance current_provenance();
const char* code_version();

// Writes `<path>` (JSON manifest) and `<path>.bin` (little-endian doubles). The manifest
// records the format version, array layout and an FNV-1a checksum of the blob.
void save_result(const std::filesystem::path& manifest, const RunResult& result);

// IoError when a file cannot be read, FormatError on truncation, checksum mismatch or
// a different format version.
RunResult load_result(const std::filesystem::path& manifest);

}  // namespace fasteit
