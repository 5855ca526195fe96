#include <map>
#include <set>

#include "doctest.h"
#include "rar/common.hpp"
#include "rar/prompts.hpp"

using namespace rar;
using namespace rar::prompts;

namespace {

RoleProfile shop_owner() {
    return {"owner", "the Shop Owner",
            "A stall keeper who counts every coin twice and trusts nobody with the till."};
}

const std::set<std::string> kAllElements = {"emotion", "experience", "standpoint", "motivation"};

}  // namespace

TEST_CASE("every template body matches its embedded digest") {
    for (TemplateId id :
         {TemplateId::Ria, TemplateId::RsoLogic, TemplateId::RsoStory, TemplateId::JudgeCoherence,
          TemplateId::JudgeRelevance, TemplateId::JudgeEffectiveness,
          TemplateId::JudgeConciseness}) {
        const std::string& body = template_body(id);
        CHECK(sha256_hex(body) == template_digest(id));
        CHECK(body.find('\r') == std::string::npos);
    }
}

TEST_CASE("full element set renders the whole scaffold") {
    std::string prompt = render_ria(shop_owner(), kAllElements, "How much for one?");
    CHECK(prompt.find("(Reflect emotion)") != std::string::npos);
    CHECK(prompt.find("(Reflect background/knowledge)") != std::string::npos);
    CHECK(prompt.find("(Reflect goals/motivations)") != std::string::npos);
    CHECK(prompt.find("(Initial conclusion)") != std::string::npos);
    CHECK(prompt.find("the Shop Owner") != std::string::npos);
    CHECK(prompt.find("counts every coin twice") != std::string::npos);
    CHECK(prompt.find("How much for one?") != std::string::npos);
    CHECK(prompt.find('{') == std::string::npos);
    CHECK(prompt.find('}') == std::string::npos);
}

TEST_CASE("ablating emotion drops exactly the feel line") {
    std::string prompt =
        render_ria(shop_owner(), {"experience", "standpoint", "motivation"}, "Hello");
    CHECK(prompt.find("First, I feel") == std::string::npos);
    CHECK(prompt.find("(Reflect background/knowledge)") != std::string::npos);
    CHECK(prompt.find("(Reflect goals/motivations)") != std::string::npos);
    CHECK(prompt.find("(Initial conclusion)") != std::string::npos);
}

TEST_CASE("the background line survives if either experience or standpoint is kept") {
    std::string with_standpoint = render_ria(shop_owner(), {"standpoint"}, "Hello");
    CHECK(with_standpoint.find("(Reflect background/knowledge)") != std::string::npos);
    CHECK(with_standpoint.find("First, I feel") == std::string::npos);
    CHECK(with_standpoint.find("(Reflect goals/motivations)") == std::string::npos);

    std::string motivation_only = render_ria(shop_owner(), {"motivation"}, "Hello");
    CHECK(motivation_only.find("(Reflect background/knowledge)") == std::string::npos);
    CHECK(motivation_only.find("(Reflect goals/motivations)") != std::string::npos);
}

TEST_CASE("ria preconditions") {
    CHECK_THROWS_AS(render_ria(shop_owner(), kAllElements, ""), InvalidInput);
    CHECK_THROWS_AS(render_ria(shop_owner(), {}, "Hello"), InvalidInput);
    CHECK_THROWS_AS(render_ria(shop_owner(), {"charisma"}, "Hello"), InvalidInput);
}

TEST_CASE("style template selection depends on the style tag alone") {
    std::string logic_fact = render_style(Scenario::Logic, Style::Fact);
    std::string story_fact = render_style(Scenario::Story, Style::Fact);
    std::string logic_know = render_style(Scenario::Logic, Style::Know);
    std::string story_know = render_style(Scenario::Story, Style::Know);

    CHECK(logic_fact == story_fact);
    CHECK(logic_know == story_know);
    CHECK(logic_fact != logic_know);

    CHECK(logic_fact.find("Rigorous and logical") != std::string::npos);
    CHECK(story_know.find("Emotionally resonant") != std::string::npos);

    CHECK_THROWS_AS(render_style(Scenario::Generic, Style::Fact), InvalidInput);
}

TEST_CASE("judge prompts embed the rubric and the four bracketed sections in order") {
    RoleProfile p = shop_owner();
    std::string coherence = render_judge(JudgeMetric::Coherence, p, "Why?", "trace", "reply");
    CHECK(coherence.find("clear logical connections between reasoning steps") !=
          std::string::npos);

    std::string conciseness = render_judge(JudgeMetric::Conciseness, p, "Why?", "trace", "reply");
    CHECK(conciseness.find("avoiding unnecessary redundant information") != std::string::npos);

    for (const std::string& prompt : {coherence, conciseness}) {
        size_t a = prompt.find("[Character Profile]");
        size_t b = prompt.find("[User Query]");
        size_t c = prompt.find("[Reasoning Trace]");
        size_t d = prompt.find("[Response]");
        REQUIRE(a != std::string::npos);
        REQUIRE(b != std::string::npos);
        REQUIRE(c != std::string::npos);
        REQUIRE(d != std::string::npos);
        CHECK(a < b);
        CHECK(b < c);
        CHECK(c < d);
    }

    // the trace slot may be empty (zero-think outputs)
    CHECK_NOTHROW(render_judge(JudgeMetric::Relevance, p, "Why?", "", "reply"));

    RoleProfile empty = p;
    empty.profile_text = "";
    CHECK_THROWS_AS(render_judge(JudgeMetric::Relevance, empty, "Why?", "t", "r"), InvalidInput);
}

TEST_CASE("rendering is pure and substitutes each sentinel exactly once") {
    RoleProfile p = shop_owner();
    std::string once = render_judge(JudgeMetric::Effectiveness, p, "QQ", "TT", "RR");
    std::string twice = render_judge(JudgeMetric::Effectiveness, p, "QQ", "TT", "RR");
    CHECK(once == twice);

    std::map<std::string, std::string> sentinels = {
        {"character_profile", "SENT_PROFILE"},
        {"user_query", "SENT_QUERY"},
        {"reasoning_trace", "SENT_TRACE"},
        {"response", "SENT_RESPONSE"},
    };
    for (TemplateId id : {TemplateId::JudgeCoherence, TemplateId::JudgeRelevance,
                          TemplateId::JudgeEffectiveness, TemplateId::JudgeConciseness}) {
        std::string rendered = substitute(template_body(id), sentinels);
        for (const auto& [key, sentinel] : sentinels) {
            size_t first = rendered.find(sentinel);
            REQUIRE(first != std::string::npos);
            CHECK(rendered.find(sentinel, first + 1) == std::string::npos);
        }
        CHECK(rendered.find('{') == std::string::npos);
        CHECK(rendered.find('}') == std::string::npos);
    }

    std::map<std::string, std::string> ria_sentinels = {
        {"character", "SENT_NAME"},
        {"character_profile", "SENT_PROFILE"},
        {"user_input", "SENT_INPUT"},
    };
    std::string rendered = substitute(template_body(TemplateId::Ria), ria_sentinels);
    for (const auto& [key, sentinel] : ria_sentinels) {
        size_t first = rendered.find(sentinel);
        REQUIRE(first != std::string::npos);
        CHECK(rendered.find(sentinel, first + 1) == std::string::npos);
    }
    CHECK(rendered.find('{') == std::string::npos);

    // substituted text must not be re-scanned
    std::string tricky = substitute(template_body(TemplateId::Ria),
                                    {{"character", "{user_input}"},
                                     {"character_profile", "p"},
                                     {"user_input", "q"}});
    CHECK(tricky.find("{user_input}") != std::string::npos);
}

TEST_CASE("unknown metric name is rejected") {
    CHECK_THROWS_AS(judge_metric_from_string("sparkle"), InvalidInput);
    CHECK(judge_metric_from_string("coherence") == JudgeMetric::Coherence);
}
