#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rar/common.hpp"

namespace rar {

// A character definition: the free-form settings text the core elements are
// extracted from.
struct RoleProfile {
    std::string role_id;
    std::string name;
    std::string profile_text;
};

// The four extracted identity elements. Absent means "not extracted", which is
// distinct from extracted-but-empty; ablation configs depend on the difference.
struct CoreElements {
    std::optional<std::string> emotion;
    std::optional<std::string> experience;
    std::optional<std::string> standpoint;
    std::optional<std::string> motivation;

    bool any() const {
        return emotion.has_value() || experience.has_value() || standpoint.has_value() ||
               motivation.has_value();
    }
};

enum class Scenario { Logic, Story, Generic };
enum class Style { Fact, Know };

std::string to_string(Scenario s);
std::string to_string(Style s);
Scenario scenario_from_string(const std::string& s);
Style style_from_string(const std::string& s);

enum class Speaker { User, Character };

struct Turn {
    Speaker speaker;
    std::string text;
};

// One (prompt, trace, answer) record; the unit of the distillation dataset.
struct Sample {
    std::string id;
    std::string role_id;
    Scenario scenario = Scenario::Generic;
    std::optional<Style> style;
    std::string system_prompt;
    std::vector<Turn> context;
    std::string query;
    std::string reasoning;
    std::string answer;
};

// Shared prompt with a style-matched chosen response and a style-mismatched
// rejected one.
struct PairPrompt {
    std::string role_id;
    Scenario scenario = Scenario::Logic;
    std::string instruction;
};

struct TraceAnswer {
    std::string reasoning;
    std::string answer;
};

struct PreferencePair {
    std::string id;
    PairPrompt prompt;
    TraceAnswer chosen;
    TraceAnswer rejected;
};

enum class Schedule { Cosine, Constant };
enum class ThinkMode { Full, Zero, Less, More };

std::string to_string(Schedule s);
std::string to_string(ThinkMode m);
Schedule schedule_from_string(const std::string& s);
ThinkMode think_mode_from_string(const std::string& s);

// Training/run configuration. Defaults follow the published recipe; the
// adapter fields (rank/alpha/dropout) are inert provenance metadata here
// because this trainer does full-parameter updates.
struct RunConfig {
    uint64_t seed = 42;
    double learning_rate = 1e-4;       // 5e-5 is the preference-stage default
    int batch_size = 8;
    int max_seq_len = 256;
    int epochs = 3;
    double warmup_ratio = 0.03;
    double weight_decay = 0.1;
    double grad_clip_norm = 1.0;
    Schedule schedule = Schedule::Cosine;
    double val_fraction = 0.01;
    std::set<std::string> ria_elements = {"emotion", "experience", "standpoint", "motivation"};
    ThinkMode think_mode = ThinkMode::Full;

    // provenance metadata only
    int lora_rank = 64;
    double lora_alpha = 16.0;
    double lora_dropout = 0.1;

    // Throws InvalidInput on the first violated range constraint.
    void validate() const;
};

// Returns one message per violated invariant; empty means valid. Never throws.
// An empty reasoning field is legal only for ZeroThink-produced samples, so
// the decoding mode the sample was produced under is part of the check.
std::vector<std::string> validate_sample(const Sample& s, ThinkMode produced_under = ThinkMode::Full);

std::vector<std::string> validate_profile(const RoleProfile& p);

}  // namespace rar
