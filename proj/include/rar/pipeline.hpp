#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rar/backend.hpp"
#include "rar/jsonl.hpp"
#include "rar/types.hpp"

namespace rar::gen {

struct Instruction {
    std::string role_id;
    std::string text;
};

struct FailureReport {
    size_t input_index;
    std::string reason;
};

struct RiaResult {
    std::vector<GenRecord> records;
    std::vector<FailureReport> failures;
};

struct RsoResult {
    std::vector<GenRecord> d_plus;
    std::vector<GenRecord> d_minus;
    std::vector<PreferencePair> pairs;
    std::vector<FailureReport> failures;
};

// Splits raw instructions into logic/story scenarios. Two implementations
// ship: a keyword heuristic (offline) and a backend-judged classifier.
class ScenarioClassifier {
  public:
    virtual ~ScenarioClassifier() = default;
    virtual Scenario classify(const std::string& instruction) = 0;
};

class KeywordClassifier : public ScenarioClassifier {
  public:
    Scenario classify(const std::string& instruction) override;
};

class BackendClassifier : public ScenarioClassifier {
  public:
    explicit BackendClassifier(std::shared_ptr<ChatBackend> backend)
        : backend_(std::move(backend)) {}
    Scenario classify(const std::string& instruction) override;

  private:
    std::shared_ptr<ChatBackend> backend_;
};

struct PipelineOptions {
    double gen_temperature = 0.7;  // diversity for data synthesis
    int max_tokens = 1024;
    int max_attempts = 3;
    int backoff_ms = 250;
    bool strict_trace = false;  // lenient split of dangling traces during synthesis
};

class Pipeline {
  public:
    Pipeline(std::shared_ptr<ChatBackend> backend, RunConfig cfg, PipelineOptions opts = {});

    // Prompts the backend to produce the four labeled identity elements for a
    // profile. Replies must carry `Label: text` lines; labels missing from the
    // reply are recorded as absent, a reply with no labels at all is an
    // ExtractionError. Results are cached by profile digest.
    CoreElements extract_elements(const RoleProfile& profile);

    // Builds the identity-activation training set: one generation per
    // instruction under the scaffolded system prompt. Per-record failures are
    // reported, never abort the batch.
    RiaResult gen_ria_dataset(const std::vector<std::pair<Instruction, RoleProfile>>& instructions);

    // Builds the style preference sets. Logic instructions pair a fact-styled
    // chosen with a knowledge-styled rejected; story instructions the
    // reverse. Pairs with either side failed are dropped and reported.
    RsoResult gen_rso_pairs(const std::vector<Instruction>& x_logic,
                            const std::vector<Instruction>& x_story,
                            const std::map<std::string, RoleProfile>& profiles);

    const std::shared_ptr<ChatBackend>& backend() const { return backend_; }

  private:
    struct Generation {
        std::string reasoning;
        std::string answer;
        std::string request_digest;
    };
    Generation generate_once(const BackendRequest& request);

    std::shared_ptr<ChatBackend> backend_;
    RunConfig cfg_;
    PipelineOptions opts_;
    std::map<std::string, CoreElements> element_cache_;  // profile digest -> elements
};

// Prompt text sent for element extraction; exposed for fixture authoring.
std::string element_extraction_prompt(const RoleProfile& profile);

}  // namespace rar::gen
