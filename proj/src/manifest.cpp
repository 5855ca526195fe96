#include "rar/manifest.hpp"

#include <chrono>
#include <ctime>

#include "json.hpp"

namespace rar {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void Manifest::add_input(const std::string& path) {
    input_digests[path] = sha256_hex(read_file(path));
}

void Manifest::write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["config_digest"] = config_digest;
    j["input_digests"] = input_digests;
    j["outputs"] = outputs;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    write_file(path, j.dump(2) + "\n");
}

}  // namespace rar
