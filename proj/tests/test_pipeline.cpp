#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "rar/pipeline.hpp"
#include "rar/prompts.hpp"

using namespace rar;
using namespace rar::gen;

namespace {

RoleProfile stall_owner() {
    return {"owner", "the Stall Owner",
            "A street-food stall owner with a sharp tongue. He grew up poor and clawed his way "
            "to a corner stand. He believes customers owe him respect. He is driven above all "
            "by the pull of profit."};
}

std::shared_ptr<MockBackend> synth_backend() { return std::make_shared<MockBackend>(); }

RunConfig toy_cfg() {
    RunConfig cfg;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("element extraction echoes labeled spans from the profile") {
    // scripted mock: echo spans lifted verbatim from the profile text
    auto backend = std::make_shared<MockBackend>(std::vector<MockBackend::Entry>{
        {"", "Output exactly four lines",
         "Emotion: sharp-tongued irritation\n"
         "Experience: grew up poor and clawed his way to a corner stand\n"
         "Standpoint: customers owe him respect\n"
         "Motivation: driven above all by the pull of profit",
         false}});
    Pipeline pipeline(backend, toy_cfg());
    CoreElements elements = pipeline.extract_elements(stall_owner());
    REQUIRE(elements.motivation.has_value());
    CHECK(elements.motivation->find("profit") != std::string::npos);
    REQUIRE(elements.experience.has_value());
    CHECK(stall_owner().profile_text.find(*elements.experience) != std::string::npos);
}

TEST_CASE("partial label coverage records the rest as absent") {
    auto backend = std::make_shared<MockBackend>(
        std::vector<MockBackend::Entry>{{"", "Output exactly four lines", "Emotion: calm", false}});
    Pipeline pipeline(backend, toy_cfg());
    CoreElements elements = pipeline.extract_elements(stall_owner());
    CHECK(elements.emotion == "calm");
    CHECK_FALSE(elements.experience.has_value());
    CHECK_FALSE(elements.standpoint.has_value());
    CHECK_FALSE(elements.motivation.has_value());
}

TEST_CASE("unlabeled prose is an extraction error") {
    auto backend = std::make_shared<MockBackend>(std::vector<MockBackend::Entry>{
        {"", "Output exactly four lines", "He is a grumpy man with a stall.", false}});
    Pipeline pipeline(backend, toy_cfg());
    CHECK_THROWS_AS(pipeline.extract_elements(stall_owner()), ExtractionError);
}

TEST_CASE("extraction is cached by profile digest") {
    auto mock = synth_backend();
    Pipeline pipeline(mock, toy_cfg());
    pipeline.extract_elements(stall_owner());
    int after_first = mock->calls();
    pipeline.extract_elements(stall_owner());
    CHECK(mock->calls() == after_first);
}

TEST_CASE("ria generation: one record per instruction, generic scenario, no style") {
    Pipeline pipeline(synth_backend(), toy_cfg());
    std::vector<std::pair<Instruction, RoleProfile>> inputs;
    for (int i = 0; i < 5; ++i)
        inputs.push_back({{"owner", "Question number " + std::to_string(i) + "?"}, stall_owner()});
    RiaResult result = pipeline.gen_ria_dataset(inputs);
    REQUIRE(result.records.size() == 5);
    CHECK(result.failures.empty());
    for (const auto& r : result.records) {
        CHECK(r.sample.scenario == Scenario::Generic);
        CHECK_FALSE(r.sample.style.has_value());
        CHECK_FALSE(r.sample.reasoning.empty());
        CHECK_FALSE(r.sample.answer.empty());
        CHECK(r.sample.system_prompt.find("I'm thinking about how to respond:") !=
              std::string::npos);
        CHECK(r.backend_id == "mock");
        CHECK(r.request_digest.size() == 64);
    }
}

TEST_CASE("per-record failures are reported and never abort the batch") {
    auto backend = std::make_shared<MockBackend>(
        std::vector<MockBackend::Entry>{{"", "POISON", "", true}});
    Pipeline pipeline(backend, toy_cfg(), {0.7, 1024, /*max_attempts=*/2, /*backoff_ms=*/1, false});
    std::vector<std::pair<Instruction, RoleProfile>> inputs = {
        {{"owner", "fine one"}, stall_owner()},
        {{"owner", "POISON here"}, stall_owner()},
        {{"owner", "another fine one"}, stall_owner()},
    };
    RiaResult result = pipeline.gen_ria_dataset(inputs);
    CHECK(result.records.size() == 2);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].input_index == 1);
}

TEST_CASE("rso crossing: logic pairs fact-chosen, story pairs know-chosen") {
    Pipeline pipeline(synth_backend(), toy_cfg());
    std::vector<Instruction> x_logic = {{"owner", "Analyze the ledger."},
                                        {"owner", "Why did sales fall?"}};
    std::vector<Instruction> x_story = {{"owner", "Tell me about your first stall."},
                                        {"owner", "Describe the market at dawn."},
                                        {"owner", "Share a memory of the rain."}};
    RsoResult result = pipeline.gen_rso_pairs(x_logic, x_story, {});

    CHECK(result.d_plus.size() == 5);
    CHECK(result.d_minus.size() == 5);
    CHECK(result.pairs.size() == 5);
    CHECK(result.failures.empty());

    // logic bucket first: chosen fact, rejected know
    CHECK(result.d_plus[0].sample.style == Style::Fact);
    CHECK(result.d_minus[0].sample.style == Style::Know);
    CHECK(result.d_plus[0].sample.scenario == Scenario::Logic);
    // story bucket: chosen know, rejected fact
    CHECK(result.d_plus[2].sample.style == Style::Know);
    CHECK(result.d_minus[2].sample.style == Style::Fact);
    CHECK(result.d_plus[2].sample.scenario == Scenario::Story);

    for (size_t i = 0; i < result.pairs.size(); ++i) {
        CHECK(result.d_plus[i].sample.style != result.d_minus[i].sample.style);
        CHECK((result.d_plus[i].sample.style == Style::Fact) ==
              (result.d_plus[i].sample.scenario == Scenario::Logic));
        CHECK(result.d_plus[i].sample.query == result.d_minus[i].sample.query);
        CHECK(result.pairs[i].prompt.instruction == result.d_plus[i].sample.query);
    }
}

TEST_CASE("property: pair cardinality and crossing over random bucket sizes") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 8; ++round) {
        size_t n_logic = rng() % 5;
        size_t n_story = rng() % 5;
        if (n_logic + n_story == 0) n_story = 1;
        std::vector<Instruction> x_logic, x_story;
        for (size_t i = 0; i < n_logic; ++i)
            x_logic.push_back({"owner", "Analyze item " + std::to_string(rng() % 1000)});
        for (size_t i = 0; i < n_story; ++i)
            x_story.push_back({"owner", "Tell me tale " + std::to_string(rng() % 1000)});

        Pipeline pipeline(synth_backend(), toy_cfg());
        RsoResult result = pipeline.gen_rso_pairs(x_logic, x_story, {});
        CHECK(result.d_plus.size() == n_logic + n_story);
        CHECK(result.d_minus.size() == n_logic + n_story);
        CHECK(result.pairs.size() == n_logic + n_story);
        for (size_t i = 0; i < result.pairs.size(); ++i) {
            CHECK(result.d_plus[i].sample.style != result.d_minus[i].sample.style);
            CHECK((result.d_plus[i].sample.style == Style::Fact) ==
                  (result.d_plus[i].sample.scenario == Scenario::Logic));
        }
    }
}

TEST_CASE("failed generations drop the whole pair") {
    auto backend = std::make_shared<MockBackend>(
        std::vector<MockBackend::Entry>{{"", "Emotionally resonant", "", true}});
    Pipeline pipeline(backend, toy_cfg(), {0.7, 1024, 2, 1, false});
    RsoResult result = pipeline.gen_rso_pairs({{"owner", "Analyze this."}}, {}, {});
    // the know-styled rejected generation fails, so the pair is dropped
    CHECK(result.pairs.empty());
    CHECK(result.d_plus.empty());
    CHECK(result.d_minus.empty());
    CHECK(result.failures.size() == 1);
}

TEST_CASE("jsonl write/read round-trip and malformed-line reporting") {
    std::string dir = testutil::scratch_dir("jsonl");
    Pipeline pipeline(synth_backend(), toy_cfg());
    std::vector<std::pair<Instruction, RoleProfile>> inputs;
    for (int i = 0; i < 3; ++i)
        inputs.push_back({{"owner", "Q" + std::to_string(i)}, stall_owner()});
    auto records = pipeline.gen_ria_dataset(inputs).records;

    std::string path = dir + "/records.jsonl";
    CHECK(write_jsonl_records(records, path) == 3);
    auto back = read_jsonl_records(path);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(to_json_line(back[i]) == to_json_line(records[i]));

    // truncate line 2 and expect the line number in the error
    auto lines = split_lines(read_file(path));
    std::string corrupted = lines[0] + "\n" + lines[1].substr(0, lines[1].size() / 2) + "\n" +
                            lines[2] + "\n";
    std::string bad_path = dir + "/bad.jsonl";
    write_file(bad_path, corrupted);
    try {
        read_jsonl_records(bad_path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("mock-backed runs are byte-deterministic") {
    auto run_once = [&](const std::string& tag) {
        std::string dir = testutil::scratch_dir(tag);
        Pipeline pipeline(synth_backend(), toy_cfg());
        std::vector<std::pair<Instruction, RoleProfile>> inputs;
        for (int i = 0; i < 4; ++i)
            inputs.push_back({{"owner", "Question " + std::to_string(i)}, stall_owner()});
        auto records = pipeline.gen_ria_dataset(inputs).records;
        std::string path = dir + "/d_r.jsonl";
        write_jsonl_records(records, path);

        auto rso = pipeline.gen_rso_pairs({{"owner", "Analyze the till."}},
                                          {{"owner", "Tell me of the rain."}}, {});
        write_jsonl_records(rso.d_plus, dir + "/d_plus.jsonl");
        write_jsonl_pairs(rso.pairs, dir + "/pairs.jsonl");
        return sha256_hex(read_file(path)) + sha256_hex(read_file(dir + "/d_plus.jsonl")) +
               sha256_hex(read_file(dir + "/pairs.jsonl"));
    };
    CHECK(run_once("det_a") == run_once("det_b"));
}

TEST_CASE("keyword classifier separates the bundled cue sets") {
    KeywordClassifier classifier;
    CHECK(classifier.classify("Analyze the books and explain the loss") == Scenario::Logic);
    CHECK(classifier.classify("Tell me about your childhood") == Scenario::Story);
    CHECK(classifier.classify("mumble mumble") == Scenario::Story);
}

TEST_CASE("backend classifier parses one-word replies") {
    auto backend = std::make_shared<MockBackend>(std::vector<MockBackend::Entry>{
        {"", "ledger", "logic", false},
        {"", "memory", "story", false},
        {"", "Classify the user instruction", "shrug", false}});
    BackendClassifier classifier(backend);
    CHECK(classifier.classify("check the ledger") == Scenario::Logic);
    CHECK(classifier.classify("an old memory") == Scenario::Story);
    CHECK_THROWS_AS(classifier.classify("unknowable"), BackendError);
}
