#pragma once

#include <optional>
#include <string>

#include "rar/lm.hpp"
#include "rar/loss.hpp"
#include "rar/types.hpp"

namespace rar {

// The single JSON config document behind every CLI command. Sections mirror
// RunConfig plus model, backend and path settings; environment variables
// override secrets only (RAR_API_KEY, RAR_BASE_URL).
struct AppConfig {
    RunConfig run;
    lm::ModelDims model;
    train::MarginSpace margin_space = train::MarginSpace::LogProb;
    train::RsoSpan rso_span = train::RsoSpan::Full;

    struct Backend {
        std::string kind = "mock";  // mock | http
        std::string base_url;
        std::string model = "default";
        std::string fixture;        // mock response table (jsonl), optional
        bool synthesize = true;     // mock fallback synthesizer
        double temperature = 0.7;
        int max_tokens = 1024;
        int max_attempts = 3;
        int backoff_ms = 250;
    } backend;

    struct Paths {
        std::string profiles;      // RoleProfile jsonl
        std::string instructions;  // generic instructions jsonl
        std::string x_logic;       // logic-scenario instructions jsonl
        std::string x_story;       // story-scenario instructions jsonl
        std::string template_dir;  // optional override
    } paths;

    // Digest of the canonicalized config document; recorded in checkpoints
    // and manifests.
    std::string digest() const;

    std::string to_json() const;
    static AppConfig from_json(const std::string& text);
    static AppConfig load(const std::string& path);
};

}  // namespace rar
