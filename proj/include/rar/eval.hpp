#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rar/backend.hpp"
#include "rar/lm.hpp"
#include "rar/prompts.hpp"
#include "rar/types.hpp"

namespace rar::eval {

struct MCItem {
    std::string id;
    std::string dimension;
    std::string prompt;
    std::vector<std::string> options;
    int answer_index = 0;

    void validate() const;
};

struct RubricItem {
    std::string id;
    std::string dimension;  // one of the 13 persona-benchmark codes
    RoleProfile profile;
    Sample sample;
};

extern const std::vector<std::string> kRubricDimensions;

struct EvalReport {
    std::map<std::string, double> per_dimension;  // dimension -> mean score
    double average = 0.0;                         // unweighted mean of dimension means
    std::map<std::string, int> n_items;
    double coverage = 1.0;  // scored items / total items
};

// The published tables' aggregation rule: per-dimension means, then the
// unweighted mean across dimensions.
EvalReport aggregate(const std::vector<std::pair<std::string, double>>& dimension_scores);

// Scores one (prompt, option) continuation; higher wins.
using OptionScorer = std::function<double(const std::string& prompt, const std::string& option)>;

// Log-likelihood option scoring with the toy model.
OptionScorer toy_lm_scorer(const lm::ToyLM& model);

// Multiple-choice protocol: pick the option with the highest score, ties to
// the lowest index; per-dimension accuracy is scaled to [0,100]. Items whose
// scoring throws are skipped and reflected in the coverage fraction.
EvalReport run_mc(const OptionScorer& scorer, const std::vector<MCItem>& items);

// Sends one judge prompt at temperature 0 and parses the reply into a score
// in [1,5]. Strict mode accepts only a bare integer; lenient mode takes the
// first integer in the reply. Out-of-range scores fail either way.
int judge_trace(gen::ChatBackend& judge, prompts::JudgeMetric metric, const RoleProfile& profile,
                const std::string& query, const std::string& trace, const std::string& response,
                bool strict = true);

// 1-5 rubric scoring over the persona dimensions. Each item is judged once
// with its dimension's rubric prompt; aggregation as in the published tables.
// Unparseable judge replies flag the item in lenient mode and abort the run
// in strict mode.
EvalReport run_rubric(gen::ChatBackend& judge, const std::vector<RubricItem>& items,
                      bool strict = true);

// The per-dimension rubric prompt text (exposed for fixture authoring).
std::string rubric_prompt(const RubricItem& item);

struct TraceReport {
    double coherence = 0.0;
    double relevance = 0.0;
    double effectiveness = 0.0;
    double conciseness = 0.0;
    int n_samples = 0;
};

// Four-metric reasoning-trace judging; one row of the trace-evaluation table.
TraceReport trace_eval_report(gen::ChatBackend& judge,
                              const std::vector<std::pair<RoleProfile, Sample>>& samples,
                              bool strict = true);

// Item file loaders (JSONL, one item per line).
std::vector<MCItem> load_mc_items(const std::string& path);
std::vector<RubricItem> load_rubric_items(const std::string& path);

// Report persistence: JSON with dimensions/average/coverage plus a flat CSV
// mirror next to it.
void write_report(const EvalReport& report, const std::string& json_path,
                  const std::string& csv_path, const std::map<std::string, std::string>& digests);

}  // namespace rar::eval
