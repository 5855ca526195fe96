#include "rar/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace rar::gen {

using nlohmann::json;

std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

void BackendRequest::validate() const {
    if (messages.empty()) throw InvalidInput("request has no messages");
    for (size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].role == Role::System && i != 0)
            throw InvalidInput("system message must be first and unique");
    }
    if (temperature < 0) throw InvalidInput("temperature must be nonnegative");
    if (max_tokens <= 0) throw InvalidInput("max_tokens must be positive");
}

std::string BackendRequest::digest() const {
    // Length-prefixed fields; no separator collisions possible.
    std::ostringstream ss;
    for (const auto& m : messages) {
        std::string role = to_string(m.role);
        ss << role.size() << ':' << role << m.content.size() << ':' << m.content;
    }
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.6g", temperature);
    ss << "t=" << tbuf << ";n=" << max_tokens << ";s=" << (seed ? std::to_string(*seed) : "-");
    return sha256_hex(ss.str());
}

std::string BackendRequest::to_json(const std::string& model) const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json body = {{"model", model},
                 {"messages", msgs},
                 {"temperature", temperature},
                 {"max_tokens", max_tokens}};
    if (seed) body["seed"] = *seed;
    return body.dump();
}

MockBackend MockBackend::from_fixture(const std::string& path, bool synthesize) {
    std::vector<Entry> table;
    std::string content = read_file(path);
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad mock fixture line: ") + e.what(), line_no);
        }
        Entry entry;
        entry.key = j.value("key", "");
        entry.match = j.value("match", "");
        entry.response = j.value("response", "");
        entry.fail = j.value("fail", false);
        table.push_back(std::move(entry));
    }
    return MockBackend(std::move(table), synthesize);
}

namespace {

std::string rendered_text(const BackendRequest& request) {
    std::string all;
    for (const auto& m : request.messages) {
        all += to_string(m.role);
        all += ": ";
        all += m.content;
        all += "\n";
    }
    return all;
}

std::string find_between(const std::string& text, const std::string& after,
                         const std::string& before) {
    size_t a = text.find(after);
    if (a == std::string::npos) return "";
    a += after.size();
    size_t b = text.find(before, a);
    if (b == std::string::npos) return "";
    return text.substr(a, b - a);
}

std::vector<std::string> sentences_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        cur.push_back(c);
        if (c == '.') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

// Phrase banks for the deterministic synthesizer. Kept short and heavily
// patterned so the character-level toy model can actually fit them.
const std::vector<std::string> kFactPoints = {
    "the numbers add up", "the evidence is plain",  "the cause precedes the effect",
    "the rule applies here", "the premise holds",   "the record is clear",
    "the facts align",       "the count is exact",
};

const std::vector<std::string> kKnowPoints = {
    "an old warmth returns",   "a memory stirs in me",    "my heart leaps at this",
    "a familiar ache rises",   "a bright feeling blooms", "the past whispers to me",
    "a quiet longing grows",   "my spirit wakes at this",
};

const std::vector<std::string> kAnswerBits = {
    "so be it", "that settles it", "mark my words", "you have my answer",
    "let it be known", "I stand by this", "take it or leave it", "so I declare",
};

size_t bank_index(const std::string& digest, int which) {
    // Two hex chars -> one byte; `which` picks the byte.
    size_t pos = size_t(which % 16) * 2;
    auto nib = [](char c) -> unsigned {
        return c <= '9' ? unsigned(c - '0') : unsigned(c - 'a' + 10);
    };
    return nib(digest[pos]) * 16 + nib(digest[pos + 1]);
}

}  // namespace

std::string MockBackend::synthesize(const BackendRequest& request) const {
    const std::string text = rendered_text(request);
    const std::string digest = request.digest();

    // Element extraction replies: label each line, content drawn from the
    // profile sentences so extraction echoes real material.
    if (text.find("Output exactly four lines") != std::string::npos) {
        std::string profile = find_between(text, "[Profile]\n", "\n[/Profile]");
        auto sents = sentences_of(profile);
        if (sents.empty()) sents.push_back("unremarkable");
        auto pick = [&](size_t i) { return sents[i % sents.size()]; };
        return "Emotion: " + pick(0) + "\nExperience: " + pick(1) + "\nStandpoint: " + pick(2) +
               "\nMotivation: " + pick(3);
    }

    // Judge replies: a bare score digit.
    if (text.find("Please act as an impartial judge") != std::string::npos) {
        return std::to_string(1 + int(bank_index(digest, 0) % 5));
    }

    // Style-conditioned generation (story/logic preference data).
    bool fact_style = text.find("Rigorous and logical") != std::string::npos &&
                      text.find("Emotionally resonant") == std::string::npos;
    bool know_style = text.find("Emotionally resonant") != std::string::npos;
    if (fact_style || know_style) {
        std::string p1, p2, answer;
        if (fact_style) {
            p1 = kFactPoints[bank_index(digest, 1) % kFactPoints.size()];
            p2 = kFactPoints[bank_index(digest, 2) % kFactPoints.size()];
            answer = "It is certain: " + kAnswerBits[bank_index(digest, 3) % kAnswerBits.size()];
            return "<think>Step one, " + p1 + ". Step two, " + p2 +
                   ". Therefore the logic holds.</think>\n" + answer + ". That is all.";
        }
        p1 = kKnowPoints[bank_index(digest, 1) % kKnowPoints.size()];
        p2 = kKnowPoints[bank_index(digest, 2) % kKnowPoints.size()];
        answer = "Oh, truly, " + kAnswerBits[bank_index(digest, 3) % kAnswerBits.size()];
        return "<think>Softly now, " + p1 + ". And then " + p2 +
               ". So my feeling carries me.</think>\n" + answer + ". That is all.";
    }

    // Identity-activation generation: follow the scaffold shape.
    if (text.find("I'm thinking about how to respond:") != std::string::npos) {
        std::string name = trim(find_between(text, "I am ", ","));
        if (name.empty()) name = "myself";
        std::string bit = kAnswerBits[bank_index(digest, 1) % kAnswerBits.size()];
        std::string feel = kKnowPoints[bank_index(digest, 2) % kKnowPoints.size()];
        return "<think>First, I feel " + feel + ". Second, based on my experience, I know my part. " +
               "Then, I need to consider my goals. So, I'm planning to speak as " + name +
               ".</think>\nI am " + name + ", and " + bit + ".";
    }

    return "OK " + digest.substr(0, 8);
}

std::string MockBackend::complete(const BackendRequest& request) {
    request.validate();
    calls_.fetch_add(1);
    const std::string digest = request.digest();
    const std::string text = rendered_text(request);
    for (const auto& entry : table_) {
        bool matched = (!entry.key.empty() && entry.key == digest) ||
                       (!entry.match.empty() && text.find(entry.match) != std::string::npos);
        if (!matched) continue;
        if (entry.fail) throw BackendError("scripted failure for request " + digest.substr(0, 8));
        return entry.response;
    }
    if (synthesize_) return synthesize(request);
    throw BackendError("no scripted response for request " + digest.substr(0, 8));
}

std::string MockBackend::timestamp() {
    // Fixed virtual clock: mock-backed artifacts must be byte-identical
    // across runs.
    return "1970-01-01T00:00:00Z";
}

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
    if (const char* url = std::getenv("RAR_BASE_URL"); url && *url) options_.base_url = url;
    if (const char* key = std::getenv("RAR_API_KEY"); key && *key) options_.api_key = key;
    if (options_.base_url.empty()) throw InvalidInput("backend base_url not set (RAR_BASE_URL)");
}

std::string HttpBackend::complete(const BackendRequest& request) {
    request.validate();
    std::string last_error;
    int backoff = options_.backoff_ms;
    for (int attempt = 0; attempt < std::max(1, options_.max_attempts); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(options_.base_url);
        client.set_read_timeout(options_.timeout_sec, 0);
        client.set_connection_timeout(options_.timeout_sec, 0);
        httplib::Headers headers;
        if (!options_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + options_.api_key);
        auto res = client.Post("/v1/chat/completions", headers, request.to_json(options_.model),
                               "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("chat completion failed with status " + std::to_string(res->status) +
                               ": " + res->body);
        try {
            json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw BackendError("chat completion failed after " + std::to_string(options_.max_attempts) +
                       " attempts: " + last_error);
}

std::string HttpBackend::timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string CachingBackend::complete(const BackendRequest& request) {
    const std::string key = request.digest();
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            ++hits_;
            return it->second;
        }
    }
    std::string reply = inner_->complete(request);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(reply));
    if (inserted) ++misses_;
    else ++hits_;
    return it->second;
}

std::string RetryingBackend::complete(const BackendRequest& request) {
    std::string last_error;
    int backoff = backoff_ms_;
    for (int attempt = 0; attempt < std::max(1, max_attempts_); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        try {
            return inner_->complete(request);
        } catch (const BackendError& e) {
            last_error = e.what();
        }
    }
    throw BackendError("exhausted retries: " + last_error);
}

}  // namespace rar::gen
