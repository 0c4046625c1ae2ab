#pragma once

#include <string>
#include <utility>
#include <vector>

#include "barddt/config.hpp"

namespace barddt {

inline constexpr const char* kVersion = "1.0.0";

std::string sha256_file(const std::string& path);
std::string sha256_text(const std::string& text);

// Effective configuration plus a [manifest] section. The file parses as a
// config, so it can be passed back through --config.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> args;     // replayable CLI arguments
    std::vector<std::pair<std::string, std::string>> inputs;   // file name -> sha256
    std::vector<std::pair<std::string, std::string>> outputs;  // file name -> sha256
    std::vector<std::pair<std::string, std::string>> facts;    // seeds, calibration constants, notes
    std::vector<std::pair<std::string, double>> timings;       // seconds
};

void write_manifest(const std::string& path, const RunConfig& config, const RunManifest& manifest);

// Reads the [manifest] section back; keys keep their arg_/input_/output_ prefixes stripped.
RunManifest read_manifest(const ConfigFile& file);

// Lowercase key usable in the config grammar.
std::string manifest_key(const std::string& name);

}  // namespace barddt
