#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "rar/lm.hpp"

namespace testutil {

inline std::string fixture_dir() {
    const char* dir = std::getenv("RAR_FIXTURE_DIR");
    return dir ? dir : "fixtures";
}

inline std::string fixture(const std::string& name) { return fixture_dir() + "/" + name; }

// Fresh scratch directory under the system temp root.
inline std::string scratch_dir(const std::string& tag) {
    auto path = std::filesystem::temp_directory_path() / ("rar_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    return path.string();
}

// Small vocabulary of exactly 16 symbols (5 reserved + 11 characters); the
// uniform-distribution oracles key on this size.
inline rar::lm::Vocab vocab16() { return rar::lm::Vocab::with_chars("abcdefghikm"); }

inline std::vector<rar::lm::TokenId> random_tokens(std::mt19937_64& rng, const rar::lm::Vocab& v,
                                                   size_t len) {
    std::uniform_int_distribution<int> pick(rar::lm::Vocab::kReservedCount, int(v.size()) - 1);
    std::vector<rar::lm::TokenId> out;
    for (size_t i = 0; i < len; ++i) out.push_back(rar::lm::TokenId(pick(rng)));
    return out;
}

}  // namespace testutil
