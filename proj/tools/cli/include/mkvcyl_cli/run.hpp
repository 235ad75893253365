#pragma once

#include <string>
#include <vector>

#include "mkvcyl_cli/config.hpp"
#include "json.hpp"

namespace mkvcyl::cli {

struct OutputRecord {
    std::string file;  // relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string command;
    std::string version;
    std::string timestamp;  // UTC, ISO 8601
    std::string config_echo;
    std::vector<OutputRecord> outputs;
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::string status = "ok";
    std::string error_kind;
    std::string error_message;

    // 0 on success, 2 for configuration errors, 1 otherwise.
    int exit_code() const;
    nlohmann::ordered_json to_json() const;
};

// Runs cfg.command.name, writes its outputs and manifest.json into
// cfg.output.dir. Errors from the modules are recorded in the manifest rather
// than thrown; files produced before the error are still written.
RunManifest run(const RunConfig& cfg);

} // namespace mkvcyl::cli
