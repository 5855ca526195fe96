#include <random>

#include "doctest.h"
#include "rar/trace.hpp"

using namespace rar;
using namespace rar::trace;

TEST_CASE("delimited completion splits into trace and answer") {
    auto [reasoning, answer] = parse_trace("<think>a</think>b");
    CHECK(reasoning == "a");
    CHECK(answer == "b");
}

TEST_CASE("completion without delimiters is all answer") {
    auto [reasoning, answer] = parse_trace("no tags at all");
    CHECK(reasoning == "");
    CHECK(answer == "no tags at all");
}

TEST_CASE("dangling opener: strict throws, lenient salvages the trace") {
    CHECK_THROWS_AS(parse_trace("<think>dangling", /*strict=*/true), TraceParseError);
    auto [reasoning, answer] = parse_trace("<think>dangling", /*strict=*/false);
    CHECK(reasoning == "dangling");
    CHECK(answer == "");
}

TEST_CASE("leading whitespace after the closing delimiter is trimmed") {
    auto [reasoning, answer] = parse_trace("<think>r</think>\n  final");
    CHECK(reasoning == "r");
    CHECK(answer == "final");
}

TEST_CASE("empty completion is an error") {
    CHECK_THROWS_AS(parse_trace(""), TraceParseError);
}

TEST_CASE("assemble of empty reasoning is the bare answer") {
    CHECK(assemble("", "just the answer") == "just the answer");
    CHECK(assemble("r", "a") == "<think>r</think>\na");
}

TEST_CASE("fuzz: parse(assemble(r, a)) round-trips exactly") {
    // Generator constraints follow the contract: no delimiter substrings in
    // either part, and the answer does not start with whitespace.
    std::mt19937_64 rng(20240817);
    const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?'-:;()\n";
    const std::string head_alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    auto random_text = [&](size_t max_len, bool no_leading_ws) {
        std::uniform_int_distribution<size_t> len_dist(0, max_len);
        size_t len = len_dist(rng);
        std::string out;
        for (size_t i = 0; i < len; ++i) {
            const std::string& pool = (i == 0 && no_leading_ws) ? head_alphabet : alphabet;
            out.push_back(pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)]);
        }
        return out;
    };

    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string reasoning = random_text(40, false);
        std::string answer = random_text(40, true);
        if (reasoning.empty() && answer.empty()) continue;  // assemble("","") is empty raw
        std::string raw = assemble(reasoning, answer);
        auto [r, a] = parse_trace(raw);
        CHECK(r == reasoning);
        CHECK(a == answer);
        ++checked;
    }
    CHECK(checked > 9000);
}
