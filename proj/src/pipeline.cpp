#include "rar/pipeline.hpp"

#include <algorithm>

#include "rar/prompts.hpp"
#include "rar/trace.hpp"

namespace rar::gen {

namespace {

bool contains_any(const std::string& text, const std::vector<std::string>& needles) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    for (const auto& n : needles) {
        if (lower.find(n) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

Scenario KeywordClassifier::classify(const std::string& instruction) {
    static const std::vector<std::string> logic_cues = {
        "analyze", "analyse", "why", "explain", "prove", "deduce", "calculate",
        "compare", "decide",  "plan", "how many", "evaluate", "reason",
    };
    static const std::vector<std::string> story_cues = {
        "tell me about", "remember", "describe", "feel", "story", "imagine",
        "recall", "dream", "reminisce", "share",
    };
    if (contains_any(instruction, logic_cues)) return Scenario::Logic;
    if (contains_any(instruction, story_cues)) return Scenario::Story;
    return Scenario::Story;  // vivid interaction is the safer default for chat
}

Scenario BackendClassifier::classify(const std::string& instruction) {
    BackendRequest req;
    req.messages.push_back(
        {Role::System,
         "Classify the user instruction as one of two role-play scenario types. "
         "Reply with exactly one word: logic (serious analysis, deduction, planning) "
         "or story (vivid interaction, emotion, recollection)."});
    req.messages.push_back({Role::User, instruction});
    req.temperature = 0.0;
    req.max_tokens = 8;
    std::string reply = backend_->complete(req);
    std::string word = trim(reply);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (word.find("logic") != std::string::npos) return Scenario::Logic;
    if (word.find("story") != std::string::npos) return Scenario::Story;
    throw BackendError("classifier reply not recognized: " + reply);
}

std::string element_extraction_prompt(const RoleProfile& profile) {
    return "Read the character profile and extract its core identity elements.\n"
           "[Profile]\n" +
           profile.profile_text +
           "\n[/Profile]\n"
           "Output exactly four lines, one per element, in this form:\n"
           "Emotion: <text>\nExperience: <text>\nStandpoint: <text>\nMotivation: <text>\n"
           "Omit a line entirely if the profile gives no basis for it.";
}

Pipeline::Pipeline(std::shared_ptr<ChatBackend> backend, RunConfig cfg, PipelineOptions opts)
    : backend_(std::move(backend)), cfg_(std::move(cfg)), opts_(opts) {
    cfg_.validate();
}

Pipeline::Generation Pipeline::generate_once(const BackendRequest& request) {
    RetryingBackend retrying(backend_, opts_.max_attempts, opts_.backoff_ms);
    std::string raw = retrying.complete(request);
    if (trim(raw).empty()) throw BackendError("backend returned an empty completion");
    auto [reasoning, answer] = trace::parse_trace(raw, opts_.strict_trace);
    return {std::move(reasoning), std::move(answer), request.digest()};
}

CoreElements Pipeline::extract_elements(const RoleProfile& profile) {
    if (auto violations = validate_profile(profile); !violations.empty())
        throw InvalidInput("invalid profile: " + violations.front());

    std::string cache_key = sha256_hex(profile.profile_text);
    if (auto it = element_cache_.find(cache_key); it != element_cache_.end()) return it->second;

    BackendRequest req;
    req.messages.push_back({Role::User, element_extraction_prompt(profile)});
    req.temperature = 0.0;
    req.max_tokens = opts_.max_tokens;
    RetryingBackend retrying(backend_, opts_.max_attempts, opts_.backoff_ms);
    std::string reply = retrying.complete(req);

    CoreElements elements;
    for (const auto& line : split_lines(reply)) {
        auto grab = [&](const char* label) -> std::optional<std::string> {
            std::string prefix = std::string(label) + ":";
            if (line.rfind(prefix, 0) != 0) return std::nullopt;
            return trim(line.substr(prefix.size()));
        };
        if (auto v = grab("Emotion")) elements.emotion = *v;
        else if (auto v = grab("Experience")) elements.experience = *v;
        else if (auto v = grab("Standpoint")) elements.standpoint = *v;
        else if (auto v = grab("Motivation")) elements.motivation = *v;
    }
    if (!elements.any())
        throw ExtractionError("reply carries none of the four element labels");
    element_cache_.emplace(cache_key, elements);
    return elements;
}

RiaResult Pipeline::gen_ria_dataset(
    const std::vector<std::pair<Instruction, RoleProfile>>& instructions) {
    if (instructions.empty()) throw InvalidInput("no instructions");

    RiaResult result;
    for (size_t i = 0; i < instructions.size(); ++i) {
        const auto& [instruction, profile] = instructions[i];
        try {
            // When elements were extracted earlier in this run, interpolate
            // them after the profile so the activation prompt carries both.
            RoleProfile enriched = profile;
            if (auto it = element_cache_.find(sha256_hex(profile.profile_text));
                it != element_cache_.end()) {
                const CoreElements& el = it->second;
                auto append = [&](const char* label, const std::optional<std::string>& v,
                                  const char* key) {
                    if (v && cfg_.ria_elements.count(key))
                        enriched.profile_text += std::string("\n") + label + ": " + *v;
                };
                append("Emotion", el.emotion, "emotion");
                append("Experience", el.experience, "experience");
                append("Standpoint", el.standpoint, "standpoint");
                append("Motivation", el.motivation, "motivation");
            }
            std::string system =
                prompts::render_ria(enriched, cfg_.ria_elements, instruction.text);
            BackendRequest req;
            req.messages.push_back({Role::System, system});
            req.messages.push_back({Role::User, instruction.text});
            req.temperature = opts_.gen_temperature;
            req.max_tokens = opts_.max_tokens;
            req.seed = int64_t(cfg_.seed);
            Generation g = generate_once(req);

            GenRecord record;
            record.sample.id = "ria-" + std::to_string(i);
            record.sample.role_id = instruction.role_id;
            record.sample.scenario = Scenario::Generic;
            record.sample.system_prompt = system;
            record.sample.query = instruction.text;
            record.sample.reasoning = g.reasoning;
            record.sample.answer = g.answer;
            record.backend_id = backend_->id();
            record.request_digest = g.request_digest;
            record.created_at = backend_->timestamp();
            result.records.push_back(std::move(record));
        } catch (const std::exception& e) {
            result.failures.push_back({i, e.what()});
        }
    }
    return result;
}

RsoResult Pipeline::gen_rso_pairs(const std::vector<Instruction>& x_logic,
                                  const std::vector<Instruction>& x_story,
                                  const std::map<std::string, RoleProfile>& profiles) {
    if (x_logic.empty() && x_story.empty()) throw InvalidInput("no instructions");

    RsoResult result;
    size_t pair_index = 0;

    auto run_bucket = [&](const std::vector<Instruction>& bucket, Scenario scenario) {
        // Matched style: fact for logic scenarios, knowledge for story ones.
        Style chosen_style = scenario == Scenario::Logic ? Style::Fact : Style::Know;
        Style rejected_style = scenario == Scenario::Logic ? Style::Know : Style::Fact;

        for (const auto& instruction : bucket) {
            size_t idx = pair_index++;
            auto gen_with_style = [&](Style style) {
                BackendRequest req;
                std::string system = prompts::render_style(scenario, style);
                auto pit = profiles.find(instruction.role_id);
                if (pit != profiles.end())
                    system += "\n\nCharacter: " + pit->second.name + ". " +
                              pit->second.profile_text;
                req.messages.push_back({Role::System, system});
                req.messages.push_back({Role::User, instruction.text});
                req.temperature = opts_.gen_temperature;
                req.max_tokens = opts_.max_tokens;
                req.seed = int64_t(cfg_.seed);
                return generate_once(req);
            };

            try {
                Generation chosen = gen_with_style(chosen_style);
                Generation rejected = gen_with_style(rejected_style);

                auto make_record = [&](const Generation& g, Style style, const char* tag) {
                    GenRecord record;
                    record.sample.id = "rso-" + std::string(tag) + "-" + std::to_string(idx);
                    record.sample.role_id = instruction.role_id;
                    record.sample.scenario = scenario;
                    record.sample.style = style;
                    record.sample.system_prompt = prompts::render_style(scenario, style);
                    record.sample.query = instruction.text;
                    record.sample.reasoning = g.reasoning;
                    record.sample.answer = g.answer;
                    record.backend_id = backend_->id();
                    record.request_digest = g.request_digest;
                    record.created_at = backend_->timestamp();
                    return record;
                };
                result.d_plus.push_back(make_record(chosen, chosen_style, "plus"));
                result.d_minus.push_back(make_record(rejected, rejected_style, "minus"));

                PreferencePair pair;
                pair.id = "pair-" + std::to_string(idx);
                pair.prompt = {instruction.role_id, scenario, instruction.text};
                pair.chosen = {result.d_plus.back().sample.reasoning,
                               result.d_plus.back().sample.answer};
                pair.rejected = {result.d_minus.back().sample.reasoning,
                                 result.d_minus.back().sample.answer};
                result.pairs.push_back(std::move(pair));
            } catch (const std::exception& e) {
                result.failures.push_back({idx, e.what()});
            }
        }
    };

    run_bucket(x_logic, Scenario::Logic);
    run_bucket(x_story, Scenario::Story);
    return result;
}

}  // namespace rar::gen
