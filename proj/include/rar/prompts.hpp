#pragma once

#include <map>
#include <set>
#include <string>

#include "rar/types.hpp"

namespace rar::prompts {

enum class TemplateId {
    Ria,
    RsoLogic,
    RsoStory,
    JudgeCoherence,
    JudgeRelevance,
    JudgeEffectiveness,
    JudgeConciseness,
};

enum class JudgeMetric { Coherence, Relevance, Effectiveness, Conciseness };

std::string to_string(TemplateId id);
std::string to_string(JudgeMetric m);
JudgeMetric judge_metric_from_string(const std::string& s);

// Template bodies live as text assets under one directory and are verified
// against embedded sha256 digests at load time, so any drift from the
// canonical wording fails loudly instead of silently changing prompts.
// The directory defaults to the RAR_TEMPLATE_DIR compile definition and can
// be overridden (tests, relocated installs) before the first load.
void set_template_dir(const std::string& dir);
std::string template_dir();

// Verified canonical body for a template (cached after first load).
const std::string& template_body(TemplateId id);

// Expected digest for a template body, as embedded at build time.
std::string template_digest(TemplateId id);

// Identity-activation system prompt. `elements` selects which scaffold lines
// survive; the emotion line, the experience/knowledge/stance line and the
// goals/motivations line are each dropped when none of their elements is
// requested. The concluding "So, I'm planning to..." line always stays.
std::string render_ria(const RoleProfile& profile, const std::set<std::string>& elements,
                       const std::string& user_input);

// Style system prompt. The style tag alone picks the body (Fact -> logic-style
// prompt, Know -> story-style prompt); the scenario is validated but unused,
// which is exactly how matched and mismatched generations differ.
std::string render_style(Scenario scenario, Style style);

// Judge prompt for one metric. `trace` may be empty (zero-think outputs);
// everything else must be nonempty.
std::string render_judge(JudgeMetric metric, const RoleProfile& profile, const std::string& query,
                         const std::string& trace, const std::string& response);

// Single-pass placeholder substitution; substituted text is never re-scanned.
// Throws InvalidInput if a referenced placeholder has no value or braces
// remain unresolved.
std::string substitute(const std::string& body, const std::map<std::string, std::string>& values);

}  // namespace rar::prompts
