#include "rar/prompts.hpp"

#include <array>
#include <mutex>

#ifndef RAR_TEMPLATE_DIR
#define RAR_TEMPLATE_DIR "assets/templates"
#endif

namespace rar::prompts {

namespace {

struct TemplateInfo {
    TemplateId id;
    const char* file;
    const char* sha256;
};

// Digests pin the canonical template wording; regenerate with
// `sha256sum` over the asset body (file minus its trailing newline).
constexpr std::array<TemplateInfo, 7> kTemplates = {{
    {TemplateId::Ria, "ria.txt",
     "425c775822772e486066cbd14464305879ef115ecb9d3965d4666109d6062f01"},
    {TemplateId::RsoLogic, "rso_logic.txt",
     "2cccf476f7c809aeed7a8c12500c37ccdb5123646ee0cdda832adfe1ee4ca82b"},
    {TemplateId::RsoStory, "rso_story.txt",
     "5b7642a1ba0722aa0598d7a4f36e15c86acfacfa09cedc2769e214518eaf04dd"},
    {TemplateId::JudgeCoherence, "judge_coherence.txt",
     "e32e6189d8f40b2597b4ba8d1051b8250ae8f767ee0c780c23ec267579b51acb"},
    {TemplateId::JudgeRelevance, "judge_relevance.txt",
     "84d7bd73a3e322d29709b4eb27bde369c7bad802fbee5885afdaf06a63ad1639"},
    {TemplateId::JudgeEffectiveness, "judge_effectiveness.txt",
     "72af9abf042147818596c3b998f62905ed4070ba2d886402d304fdebcb05c2bb"},
    {TemplateId::JudgeConciseness, "judge_conciseness.txt",
     "2357590d919d97916ae083afca82623cd076d9e659dd2e9dfa13dbc92c001a87"},
}};

const TemplateInfo& info_for(TemplateId id) {
    for (const auto& t : kTemplates) {
        if (t.id == id) return t;
    }
    throw InvalidInput("unknown template id");
}

std::mutex g_mutex;
std::string g_dir = RAR_TEMPLATE_DIR;
std::map<std::string, std::string> g_cache;  // file name -> verified body

}  // namespace

std::string to_string(TemplateId id) {
    switch (id) {
        case TemplateId::Ria: return "RIA";
        case TemplateId::RsoLogic: return "RSO_LOGIC";
        case TemplateId::RsoStory: return "RSO_STORY";
        case TemplateId::JudgeCoherence: return "JUDGE_COHERENCE";
        case TemplateId::JudgeRelevance: return "JUDGE_RELEVANCE";
        case TemplateId::JudgeEffectiveness: return "JUDGE_EFFECTIVENESS";
        case TemplateId::JudgeConciseness: return "JUDGE_CONCISENESS";
    }
    return "?";
}

std::string to_string(JudgeMetric m) {
    switch (m) {
        case JudgeMetric::Coherence: return "coherence";
        case JudgeMetric::Relevance: return "relevance";
        case JudgeMetric::Effectiveness: return "effectiveness";
        case JudgeMetric::Conciseness: return "conciseness";
    }
    return "?";
}

JudgeMetric judge_metric_from_string(const std::string& s) {
    if (s == "coherence") return JudgeMetric::Coherence;
    if (s == "relevance") return JudgeMetric::Relevance;
    if (s == "effectiveness") return JudgeMetric::Effectiveness;
    if (s == "conciseness") return JudgeMetric::Conciseness;
    throw InvalidInput("unknown judge metric: " + s);
}

void set_template_dir(const std::string& dir) {
    std::lock_guard lock(g_mutex);
    g_dir = dir;
    g_cache.clear();
}

std::string template_dir() {
    std::lock_guard lock(g_mutex);
    return g_dir;
}

std::string template_digest(TemplateId id) { return info_for(id).sha256; }

const std::string& template_body(TemplateId id) {
    const TemplateInfo& info = info_for(id);
    std::lock_guard lock(g_mutex);
    auto it = g_cache.find(info.file);
    if (it != g_cache.end()) return it->second;

    std::string raw = read_file(g_dir + "/" + info.file);
    if (raw.find('\r') != std::string::npos)
        throw InvalidInput(std::string("template has CR line endings: ") + info.file);
    if (!raw.empty() && raw.back() == '\n') raw.pop_back();
    std::string digest = sha256_hex(raw);
    if (digest != info.sha256)
        throw InvalidInput(std::string("template digest mismatch for ") + info.file + ": got " +
                           digest);
    return g_cache.emplace(info.file, std::move(raw)).first->second;
}

std::string substitute(const std::string& body, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(body.size() + 64);
    size_t pos = 0;
    while (pos < body.size()) {
        size_t open = body.find('{', pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        size_t close = body.find('}', open);
        if (close == std::string::npos)
            throw InvalidInput("unterminated placeholder in template");
        out.append(body, pos, open - pos);
        std::string key = body.substr(open + 1, close - open - 1);
        auto it = values.find(key);
        if (it == values.end()) throw InvalidInput("unresolved placeholder: {" + key + "}");
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::string render_ria(const RoleProfile& profile, const std::set<std::string>& elements,
                       const std::string& user_input) {
    if (user_input.empty()) throw InvalidInput("user_input must be nonempty");
    if (elements.empty()) throw InvalidInput("element set must be nonempty");
    for (const auto& e : elements) {
        if (e != "emotion" && e != "experience" && e != "standpoint" && e != "motivation")
            throw InvalidInput("unknown ria element: " + e);
    }

    bool want_emotion = elements.count("emotion") > 0;
    bool want_background = elements.count("experience") > 0 || elements.count("standpoint") > 0;
    bool want_motivation = elements.count("motivation") > 0;

    const std::string& body = template_body(TemplateId::Ria);
    std::string scaffolded;
    for (const auto& line : split_lines(body)) {
        if (!want_emotion && line.find("(Reflect emotion)") != std::string::npos) continue;
        if (!want_background && line.find("(Reflect background/knowledge)") != std::string::npos)
            continue;
        if (!want_motivation && line.find("(Reflect goals/motivations)") != std::string::npos)
            continue;
        if (!scaffolded.empty()) scaffolded.push_back('\n');
        scaffolded.append(line);
    }

    return substitute(scaffolded, {{"character", profile.name},
                                   {"character_profile", profile.profile_text},
                                   {"user_input", user_input}});
}

std::string render_style(Scenario scenario, Style style) {
    if (scenario == Scenario::Generic)
        throw InvalidInput("style prompts are defined for logic/story scenarios only");
    // Selection is by style tag only; scenario is validated, not used.
    return template_body(style == Style::Fact ? TemplateId::RsoLogic : TemplateId::RsoStory);
}

std::string render_judge(JudgeMetric metric, const RoleProfile& profile, const std::string& query,
                         const std::string& trace, const std::string& response) {
    if (profile.profile_text.empty()) throw InvalidInput("profile_text must be nonempty");
    if (query.empty()) throw InvalidInput("query must be nonempty");
    if (response.empty()) throw InvalidInput("response must be nonempty");

    TemplateId id;
    switch (metric) {
        case JudgeMetric::Coherence: id = TemplateId::JudgeCoherence; break;
        case JudgeMetric::Relevance: id = TemplateId::JudgeRelevance; break;
        case JudgeMetric::Effectiveness: id = TemplateId::JudgeEffectiveness; break;
        case JudgeMetric::Conciseness: id = TemplateId::JudgeConciseness; break;
        default: throw InvalidInput("unknown judge metric");
    }
    return substitute(template_body(id), {{"character_profile", profile.profile_text},
                                          {"user_query", query},
                                          {"reasoning_trace", trace},
                                          {"response", response}});
}

}  // namespace rar::prompts
