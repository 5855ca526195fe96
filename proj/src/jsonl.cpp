#include "rar/jsonl.hpp"

#include <fstream>

#include "json.hpp"

namespace rar::gen {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json sample_to_json(const Sample& s) {
    ordered_json j;
    j["id"] = s.id;
    j["role_id"] = s.role_id;
    j["scenario"] = to_string(s.scenario);
    if (s.style) j["style"] = to_string(*s.style);
    else j["style"] = nullptr;
    j["system_prompt"] = s.system_prompt;
    ordered_json ctx = ordered_json::array();
    for (const auto& turn : s.context) {
        ctx.push_back({{"speaker", turn.speaker == Speaker::User ? "user" : "character"},
                       {"text", turn.text}});
    }
    j["context"] = ctx;
    j["query"] = s.query;
    j["reasoning"] = s.reasoning;
    j["answer"] = s.answer;
    return j;
}

Sample sample_from_json(const ordered_json& j) {
    Sample s;
    s.id = j.at("id").get<std::string>();
    s.role_id = j.at("role_id").get<std::string>();
    s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("style") && !j.at("style").is_null())
        s.style = style_from_string(j.at("style").get<std::string>());
    s.system_prompt = j.value("system_prompt", "");
    if (j.contains("context")) {
        for (const auto& t : j.at("context")) {
            Turn turn;
            std::string sp = t.at("speaker").get<std::string>();
            if (sp != "user" && sp != "character") throw InvalidInput("bad speaker: " + sp);
            turn.speaker = sp == "user" ? Speaker::User : Speaker::Character;
            turn.text = t.at("text").get<std::string>();
            s.context.push_back(std::move(turn));
        }
    }
    s.query = j.value("query", "");
    s.reasoning = j.value("reasoning", "");
    s.answer = j.value("answer", "");
    return s;
}

template <typename T, typename ParseFn>
std::vector<T> read_lines(const std::string& path, ParseFn parse) {
    std::vector<T> out;
    std::string content = read_file(path);
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), line_no);
        } catch (const InvalidInput& e) {
            throw ParseError(std::string("invalid record: ") + e.what(), line_no);
        }
    }
    return out;
}

template <typename T, typename DumpFn>
size_t write_lines(const std::vector<T>& items, const std::string& path, DumpFn dump) {
    std::string buffer;
    for (const auto& item : items) {
        buffer += dump(item);
        buffer += '\n';
    }
    write_file(path, buffer);
    return items.size();
}

}  // namespace

std::string to_json_line(const GenRecord& r) {
    ordered_json j = sample_to_json(r.sample);
    j["backend_id"] = r.backend_id;
    j["request_digest"] = r.request_digest;
    j["created_at"] = r.created_at;
    return j.dump();
}

GenRecord gen_record_from_json(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    GenRecord r;
    r.sample = sample_from_json(j);
    r.backend_id = j.value("backend_id", "");
    r.request_digest = j.value("request_digest", "");
    r.created_at = j.value("created_at", "");
    return r;
}

std::string to_json_line(const PreferencePair& p) {
    ordered_json j;
    j["id"] = p.id;
    j["prompt"] = {{"role_id", p.prompt.role_id},
                   {"scenario", to_string(p.prompt.scenario)},
                   {"instruction", p.prompt.instruction}};
    j["chosen"] = {{"reasoning", p.chosen.reasoning}, {"answer", p.chosen.answer}};
    j["rejected"] = {{"reasoning", p.rejected.reasoning}, {"answer", p.rejected.answer}};
    return j.dump();
}

PreferencePair pair_from_json(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    PreferencePair p;
    p.id = j.at("id").get<std::string>();
    const auto& pr = j.at("prompt");
    p.prompt.role_id = pr.at("role_id").get<std::string>();
    p.prompt.scenario = scenario_from_string(pr.at("scenario").get<std::string>());
    if (p.prompt.scenario == Scenario::Generic)
        throw InvalidInput("preference pairs cannot carry the generic scenario");
    p.prompt.instruction = pr.at("instruction").get<std::string>();
    p.chosen = {j.at("chosen").at("reasoning").get<std::string>(),
                j.at("chosen").at("answer").get<std::string>()};
    p.rejected = {j.at("rejected").at("reasoning").get<std::string>(),
                  j.at("rejected").at("answer").get<std::string>()};
    return p;
}

size_t write_jsonl_records(const std::vector<GenRecord>& records, const std::string& path) {
    return write_lines(records, path, [](const GenRecord& r) { return to_json_line(r); });
}

size_t write_jsonl_pairs(const std::vector<PreferencePair>& pairs, const std::string& path) {
    return write_lines(pairs, path, [](const PreferencePair& p) { return to_json_line(p); });
}

std::vector<GenRecord> read_jsonl_records(const std::string& path) {
    return read_lines<GenRecord>(path, [](const std::string& l) { return gen_record_from_json(l); });
}

std::vector<PreferencePair> read_jsonl_pairs(const std::string& path) {
    return read_lines<PreferencePair>(path, [](const std::string& l) { return pair_from_json(l); });
}

}  // namespace rar::gen
