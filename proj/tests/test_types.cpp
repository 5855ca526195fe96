#include "doctest.h"
#include "rar/jsonl.hpp"
#include "rar/types.hpp"

using namespace rar;

namespace {

Sample well_formed() {
    Sample s;
    s.id = "s1";
    s.role_id = "owner";
    s.scenario = Scenario::Generic;
    s.system_prompt = "sys";
    s.context = {{Speaker::User, "hi"}, {Speaker::Character, "hello"}};
    s.query = "how much?";
    s.reasoning = "thinking it through";
    s.answer = "three coins";
    return s;
}

}  // namespace

TEST_CASE("well-formed sample has no violations") {
    CHECK(validate_sample(well_formed()).empty());
}

TEST_CASE("empty answer is reported") {
    Sample s = well_formed();
    s.answer = "";
    auto v = validate_sample(s, ThinkMode::Full);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "answer empty");
}

TEST_CASE("context must alternate user/character starting from user") {
    Sample s = well_formed();
    s.context = {{Speaker::User, "a"}, {Speaker::User, "b"}};
    auto v = validate_sample(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "context alternation");

    s.context = {{Speaker::Character, "a"}};
    CHECK(validate_sample(s).size() == 1);

    s.context.clear();
    CHECK(validate_sample(s).empty());
}

TEST_CASE("empty reasoning is legal only under zero-think") {
    Sample s = well_formed();
    s.reasoning = "";
    CHECK(validate_sample(s, ThinkMode::Zero).empty());
    CHECK_FALSE(validate_sample(s, ThinkMode::Full).empty());
}

TEST_CASE("core elements distinguish absent from empty") {
    CoreElements none;
    CHECK_FALSE(none.any());
    CoreElements one;
    one.emotion = "";  // extracted but empty text is still "present"
    CHECK(one.any());
}

TEST_CASE("run config range checks") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    RunConfig bad = cfg;
    bad.learning_rate = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);

    bad = cfg;
    bad.warmup_ratio = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);

    bad = cfg;
    bad.val_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);

    bad = cfg;
    bad.ria_elements.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidInput);

    bad = cfg;
    bad.ria_elements = {"emotion", "charisma"};
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("record serialization round-trips by value") {
    gen::GenRecord r;
    r.sample = well_formed();
    r.sample.style = Style::Fact;
    r.sample.scenario = Scenario::Logic;
    r.backend_id = "mock";
    r.request_digest = "abc123";
    r.created_at = "1970-01-01T00:00:00Z";

    std::string line = gen::to_json_line(r);
    gen::GenRecord back = gen::gen_record_from_json(line);
    CHECK(gen::to_json_line(back) == line);
    CHECK(back.sample.id == r.sample.id);
    CHECK(back.sample.style == r.sample.style);
    CHECK(back.sample.context.size() == 2);
    CHECK(back.sample.context[1].text == "hello");
}

TEST_CASE("preference pair serialization round-trips and rejects generic") {
    PreferencePair p;
    p.id = "p0";
    p.prompt = {"owner", Scenario::Story, "tell me about your day"};
    p.chosen = {"soft thought", "warm answer"};
    p.rejected = {"cold logic", "dry answer"};

    std::string line = gen::to_json_line(p);
    PreferencePair back = gen::pair_from_json(line);
    CHECK(gen::to_json_line(back) == line);

    // generic scenario is reserved for the distillation set, never for pairs
    std::string corrupted = line;
    auto at = corrupted.find("\"story\"");
    corrupted.replace(at, 7, "\"generic\"");
    CHECK_THROWS_AS(gen::pair_from_json(corrupted), InvalidInput);
}
