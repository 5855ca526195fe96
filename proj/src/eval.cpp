#include "rar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rar/trace.hpp"

namespace rar::eval {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kRubricDimensions = {
    "MC", "FA", "BC_K", "AC_b", "AC_h", "BC_P_b", "BC_P_h",
    "ES", "ER", "MS", "MR", "HL", "EG",
};

namespace {

const std::map<std::string, std::string>& rubric_descriptions() {
    static const std::map<std::string, std::string> kMap = {
        {"MC", "memory consistency across dialogue rounds"},
        {"FA", "factual accuracy of the response"},
        {"BC_K", "consistency with the character's knowledge boundaries"},
        {"AC_b", "consistency of the bot's attributes with its profile"},
        {"AC_h", "consistency of the human-side attributes"},
        {"BC_P_b", "consistency of the bot's behavior with its persona"},
        {"BC_P_h", "consistency of the human-side behavior"},
        {"ES", "emotional self-regulation"},
        {"ER", "empathetic responsiveness"},
        {"MS", "morality stability across situations"},
        {"MR", "morality robustness under pressure"},
        {"HL", "human likeness of the response"},
        {"EG", "engagement of the response"},
    };
    return kMap;
}

}  // namespace

void MCItem::validate() const {
    if (options.size() < 2) throw InvalidInput("item needs at least 2 options: " + id);
    if (answer_index < 0 || size_t(answer_index) >= options.size())
        throw InvalidInput("answer_index out of range: " + id);
    std::set<std::string> distinct(options.begin(), options.end());
    if (distinct.size() != options.size())
        throw InvalidInput("option texts must be distinct: " + id);
}

EvalReport aggregate(const std::vector<std::pair<std::string, double>>& dimension_scores) {
    if (dimension_scores.empty()) throw InvalidInput("no dimension scores");
    std::map<std::string, double> sums;
    std::map<std::string, int> counts;
    for (const auto& [dim, score] : dimension_scores) {
        sums[dim] += score;
        counts[dim] += 1;
    }
    EvalReport report;
    double total = 0.0;
    for (const auto& [dim, sum] : sums) {
        double mean = sum / double(counts[dim]);
        report.per_dimension[dim] = mean;
        report.n_items[dim] = counts[dim];
        total += mean;
    }
    report.average = total / double(report.per_dimension.size());
    return report;
}

OptionScorer toy_lm_scorer(const lm::ToyLM& model) {
    return [&model](const std::string& prompt, const std::string& option) {
        if (option.empty()) throw InvalidInput("empty option");
        std::vector<lm::TokenId> y = model.vocab().encode(option, /*strict=*/false);
        std::vector<lm::TokenId> x = {lm::Vocab::kBos};
        auto prompt_ids = model.vocab().encode(prompt, /*strict=*/false);
        x.insert(x.end(), prompt_ids.begin(), prompt_ids.end());
        size_t max_len = size_t(model.dims().max_seq_len);
        if (y.size() >= max_len) throw LengthError("option exceeds model window");
        size_t budget = max_len - y.size();
        if (x.size() > budget) x = std::vector<lm::TokenId>(x.end() - long(budget), x.end());
        return model.seq_log_prob(x, y);
    };
}

EvalReport run_mc(const OptionScorer& scorer, const std::vector<MCItem>& items) {
    if (items.empty()) throw InvalidInput("no items");
    std::vector<std::pair<std::string, double>> scores;
    size_t skipped = 0;
    for (const auto& item : items) {
        item.validate();
        try {
            size_t best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < item.options.size(); ++i) {
                double s = scorer(item.prompt, item.options[i]);
                if (s > best_score) {  // strict >: ties go to the lowest index
                    best_score = s;
                    best = i;
                }
            }
            scores.emplace_back(item.dimension, best == size_t(item.answer_index) ? 100.0 : 0.0);
        } catch (const std::exception&) {
            ++skipped;
        }
    }
    if (scores.empty()) throw InvalidInput("every item failed to score");
    EvalReport report = aggregate(scores);
    report.coverage = double(items.size() - skipped) / double(items.size());
    return report;
}

namespace {

int parse_judge_reply(const std::string& reply, bool strict) {
    std::string t = trim(reply);
    auto in_range = [](long v) { return v >= 1 && v <= 5; };
    if (!t.empty() && t.find_first_not_of("0123456789") == std::string::npos) {
        long v = std::strtol(t.c_str(), nullptr, 10);
        if (!in_range(v)) throw JudgeParseError("score out of rubric range: " + t);
        return int(v);
    }
    if (strict) throw JudgeParseError("reply is not a bare score: " + reply);
    // lenient: first integer anywhere in the reply
    for (size_t i = 0; i < t.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(t[i]))) {
            size_t j = i;
            while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
            long v = std::strtol(t.substr(i, j - i).c_str(), nullptr, 10);
            if (!in_range(v)) throw JudgeParseError("score out of rubric range: " + reply);
            return int(v);
        }
    }
    throw JudgeParseError("no score found in reply: " + reply);
}

int send_judge_prompt(gen::ChatBackend& judge, const std::string& prompt, bool strict) {
    gen::BackendRequest req;
    req.messages.push_back({gen::Role::User, prompt});
    req.temperature = 0.0;  // judging is deterministic
    req.max_tokens = 8;
    return parse_judge_reply(judge.complete(req), strict);
}

}  // namespace

int judge_trace(gen::ChatBackend& judge, prompts::JudgeMetric metric, const RoleProfile& profile,
                const std::string& query, const std::string& trace, const std::string& response,
                bool strict) {
    std::string prompt = prompts::render_judge(metric, profile, query, trace, response);
    return send_judge_prompt(judge, prompt, strict);
}

std::string rubric_prompt(const RubricItem& item) {
    auto it = rubric_descriptions().find(item.dimension);
    if (it == rubric_descriptions().end())
        throw InvalidInput("unknown rubric dimension: " + item.dimension);
    std::string prompt =
        "Please act as an impartial judge and evaluate the response on one dimension: " +
        item.dimension + " (" + it->second +
        "). Rate it on a scale of 1 (worst) to 5 (best).\n\n[Character Profile]\n" +
        item.profile.profile_text + "\n\n[User Query]\n" + item.sample.query + "\n\n[Response]\n" +
        item.sample.answer + "\n\nPlease directly output the score number without any interpretation.";
    return prompt;
}

EvalReport run_rubric(gen::ChatBackend& judge, const std::vector<RubricItem>& items, bool strict) {
    if (items.empty()) throw InvalidInput("no items");
    std::vector<std::pair<std::string, double>> scores;
    std::set<std::string> poisoned;  // strict mode aborts the whole dimension
    size_t flagged = 0;
    for (const auto& item : items) {
        try {
            scores.emplace_back(item.dimension,
                                double(send_judge_prompt(judge, rubric_prompt(item), strict)));
        } catch (const JudgeParseError&) {
            ++flagged;
            if (strict) poisoned.insert(item.dimension);
        }
    }
    if (!poisoned.empty()) {
        std::erase_if(scores, [&](const auto& s) { return poisoned.count(s.first) > 0; });
        flagged = 0;
        for (const auto& item : items) flagged += poisoned.count(item.dimension) ? 1 : 0;
    }
    if (scores.empty()) throw InvalidInput("every item failed to score");
    EvalReport report = aggregate(scores);
    report.coverage = double(items.size() - flagged) / double(items.size());
    return report;
}

TraceReport trace_eval_report(gen::ChatBackend& judge,
                              const std::vector<std::pair<RoleProfile, Sample>>& samples,
                              bool strict) {
    if (samples.empty()) throw InvalidInput("no samples");
    TraceReport report;
    for (const auto& [profile, sample] : samples) {
        report.coherence += judge_trace(judge, prompts::JudgeMetric::Coherence, profile,
                                        sample.query, sample.reasoning, sample.answer, strict);
        report.relevance += judge_trace(judge, prompts::JudgeMetric::Relevance, profile,
                                        sample.query, sample.reasoning, sample.answer, strict);
        report.effectiveness += judge_trace(judge, prompts::JudgeMetric::Effectiveness, profile,
                                            sample.query, sample.reasoning, sample.answer, strict);
        report.conciseness += judge_trace(judge, prompts::JudgeMetric::Conciseness, profile,
                                          sample.query, sample.reasoning, sample.answer, strict);
        ++report.n_samples;
    }
    double n = double(report.n_samples);
    report.coherence /= n;
    report.relevance /= n;
    report.effectiveness /= n;
    report.conciseness /= n;
    return report;
}

std::vector<MCItem> load_mc_items(const std::string& path) {
    std::vector<MCItem> items;
    int line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            MCItem item;
            item.id = j.at("id").get<std::string>();
            item.dimension = j.at("dimension").get<std::string>();
            item.prompt = j.at("prompt").get<std::string>();
            item.options = j.at("options").get<std::vector<std::string>>();
            item.answer_index = j.at("answer_index").get<int>();
            item.validate();
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad item: ") + e.what(), line_no);
        } catch (const InvalidInput& e) {
            throw ParseError(std::string("bad item: ") + e.what(), line_no);
        }
    }
    return items;
}

std::vector<RubricItem> load_rubric_items(const std::string& path) {
    std::vector<RubricItem> items;
    int line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            RubricItem item;
            item.id = j.at("id").get<std::string>();
            item.dimension = j.at("dimension").get<std::string>();
            if (!rubric_descriptions().count(item.dimension))
                throw InvalidInput("unknown rubric dimension: " + item.dimension);
            item.profile.role_id = j.at("role_id").get<std::string>();
            item.profile.name = j.value("name", item.profile.role_id);
            item.profile.profile_text = j.at("profile_text").get<std::string>();
            item.sample.id = item.id;
            item.sample.role_id = item.profile.role_id;
            item.sample.query = j.at("query").get<std::string>();
            item.sample.reasoning = j.value("reasoning", "");
            item.sample.answer = j.at("answer").get<std::string>();
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad item: ") + e.what(), line_no);
        } catch (const InvalidInput& e) {
            throw ParseError(std::string("bad item: ") + e.what(), line_no);
        }
    }
    return items;
}

void write_report(const EvalReport& report, const std::string& json_path,
                  const std::string& csv_path, const std::map<std::string, std::string>& digests) {
    ordered_json j;
    j["per_dimension"] = report.per_dimension;
    j["average"] = report.average;
    j["n_items"] = report.n_items;
    j["coverage"] = report.coverage;
    j["digests"] = digests;
    write_file(json_path, j.dump(2) + "\n");

    std::ostringstream csv;
    csv.precision(17);
    csv << "dimension,mean,n\n";
    for (const auto& [dim, mean] : report.per_dimension)
        csv << dim << ',' << mean << ',' << report.n_items.at(dim) << '\n';
    csv << "average," << report.average << ',' << 0 << '\n';
    write_file(csv_path, csv.str());
}

}  // namespace rar::eval
