#include "rar/types.hpp"

namespace rar {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Logic: return "logic";
        case Scenario::Story: return "story";
        case Scenario::Generic: return "generic";
    }
    return "generic";
}

std::string to_string(Style s) { return s == Style::Fact ? "fact" : "know"; }

Scenario scenario_from_string(const std::string& s) {
    if (s == "logic") return Scenario::Logic;
    if (s == "story") return Scenario::Story;
    if (s == "generic") return Scenario::Generic;
    throw InvalidInput("unknown scenario: " + s);
}

Style style_from_string(const std::string& s) {
    if (s == "fact") return Style::Fact;
    if (s == "know") return Style::Know;
    throw InvalidInput("unknown style: " + s);
}

std::string to_string(Schedule s) { return s == Schedule::Cosine ? "cosine" : "constant"; }

std::string to_string(ThinkMode m) {
    switch (m) {
        case ThinkMode::Full: return "full";
        case ThinkMode::Zero: return "zero";
        case ThinkMode::Less: return "less";
        case ThinkMode::More: return "more";
    }
    return "full";
}

Schedule schedule_from_string(const std::string& s) {
    if (s == "cosine") return Schedule::Cosine;
    if (s == "constant") return Schedule::Constant;
    throw InvalidInput("unknown schedule: " + s);
}

ThinkMode think_mode_from_string(const std::string& s) {
    if (s == "full") return ThinkMode::Full;
    if (s == "zero") return ThinkMode::Zero;
    if (s == "less") return ThinkMode::Less;
    if (s == "more") return ThinkMode::More;
    throw InvalidInput("unknown think mode: " + s);
}

void RunConfig::validate() const {
    if (learning_rate <= 0) throw InvalidInput("learning_rate must be positive");
    if (batch_size <= 0) throw InvalidInput("batch_size must be positive");
    if (max_seq_len <= 0) throw InvalidInput("max_seq_len must be positive");
    if (epochs <= 0) throw InvalidInput("epochs must be positive");
    if (warmup_ratio < 0 || warmup_ratio > 1) throw InvalidInput("warmup_ratio must be in [0,1]");
    if (weight_decay < 0) throw InvalidInput("weight_decay must be nonnegative");
    if (grad_clip_norm <= 0) throw InvalidInput("grad_clip_norm must be positive");
    if (val_fraction <= 0 || val_fraction >= 1) throw InvalidInput("val_fraction must be in (0,1)");
    if (ria_elements.empty()) throw InvalidInput("ria_elements must be nonempty");
    static const std::set<std::string> known = {"emotion", "experience", "standpoint", "motivation"};
    for (const auto& e : ria_elements) {
        if (!known.count(e)) throw InvalidInput("unknown ria element: " + e);
    }
}

std::vector<std::string> validate_sample(const Sample& s, ThinkMode produced_under) {
    std::vector<std::string> violations;
    if (s.id.empty()) violations.push_back("id empty");
    if (s.role_id.empty()) violations.push_back("role_id empty");
    if (s.answer.empty()) violations.push_back("answer empty");
    if (s.reasoning.empty() && produced_under != ThinkMode::Zero)
        violations.push_back("reasoning empty outside zero-think");
    // Context must strictly alternate user/character, starting from user.
    for (size_t i = 0; i < s.context.size(); ++i) {
        Speaker expected = (i % 2 == 0) ? Speaker::User : Speaker::Character;
        if (s.context[i].speaker != expected) {
            violations.push_back("context alternation");
            break;
        }
    }
    return violations;
}

std::vector<std::string> validate_profile(const RoleProfile& p) {
    std::vector<std::string> violations;
    if (p.role_id.empty()) violations.push_back("role_id empty");
    if (p.profile_text.empty()) violations.push_back("profile_text empty");
    return violations;
}

}  // namespace rar
