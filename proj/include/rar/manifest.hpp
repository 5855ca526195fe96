#pragma once

#include <map>
#include <string>
#include <vector>

#include "rar/common.hpp"

namespace rar {

// Every artifact-writing command drops one of these next to its outputs.
// Timestamps are the only fields allowed to differ between otherwise
// identical runs.
struct Manifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::string config_digest;
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::vector<std::string> outputs;
    std::string started_at;
    std::string finished_at;

    void add_input(const std::string& path);
    void add_output(const std::string& path) { outputs.push_back(path); }
    void write(const std::string& path) const;
};

std::string now_iso8601();

}  // namespace rar
