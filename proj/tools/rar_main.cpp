// rar: role-aware reasoning toolkit CLI.
// Every subcommand reads one JSON config, runs a pipeline stage from
// persisted artifacts, and writes its outputs plus a manifest under --out.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"
#include "rar/config.hpp"
#include "rar/eval.hpp"
#include "rar/manifest.hpp"
#include "rar/pipeline.hpp"
#include "rar/probe.hpp"
#include "rar/prompts.hpp"
#include "rar/trace.hpp"
#include "rar/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rar;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string mock_fixture;
    std::optional<uint64_t> seed;
    std::string ria_elements;   // comma separated override
    std::string think_mode;
    std::string margin_space;
    std::string rso_span;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    auto* out = cmd->add_option("--out", args.out_dir, "output directory");
    if (needs_out) out->required();
    cmd->add_option("--mock", args.mock_fixture, "mock backend fixture (forces backend.kind=mock)");
    cmd->add_option("--seed", args.seed, "override config seed");
    cmd->add_option("--ria-elements", args.ria_elements,
                    "comma-separated element subset (ablation)");
    cmd->add_option("--think-mode", args.think_mode, "full|zero|less|more");
    cmd->add_option("--margin-space", args.margin_space, "logprob|logprob_mean");
    cmd->add_option("--rso-span", args.rso_span, "full|trace_only");
}

AppConfig load_config(const CommonArgs& args) {
    AppConfig cfg = args.config_path.empty() ? AppConfig{} : AppConfig::load(args.config_path);
    if (!args.mock_fixture.empty()) {
        cfg.backend.kind = "mock";
        cfg.backend.fixture = args.mock_fixture;
    }
    if (args.seed) cfg.run.seed = *args.seed;
    if (!args.ria_elements.empty()) {
        cfg.run.ria_elements.clear();
        std::string rest = args.ria_elements;
        while (!rest.empty()) {
            size_t comma = rest.find(',');
            cfg.run.ria_elements.insert(trim(rest.substr(0, comma)));
            rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
        }
    }
    if (!args.think_mode.empty()) cfg.run.think_mode = think_mode_from_string(args.think_mode);
    if (!args.margin_space.empty())
        cfg.margin_space = args.margin_space == "logprob_mean" ? train::MarginSpace::LogProbMean
                                                               : train::MarginSpace::LogProb;
    if (!args.rso_span.empty())
        cfg.rso_span =
            args.rso_span == "trace_only" ? train::RsoSpan::TraceOnly : train::RsoSpan::Full;
    if (!cfg.paths.template_dir.empty()) prompts::set_template_dir(cfg.paths.template_dir);
    cfg.run.validate();
    return cfg;
}

std::shared_ptr<gen::ChatBackend> make_backend(const AppConfig& cfg) {
    if (cfg.backend.kind == "mock") {
        auto mock = cfg.backend.fixture.empty()
                        ? std::make_shared<gen::MockBackend>()
                        : std::make_shared<gen::MockBackend>(
                              gen::MockBackend::from_fixture(cfg.backend.fixture,
                                                             cfg.backend.synthesize));
        return std::make_shared<gen::CachingBackend>(mock);
    }
    if (cfg.backend.kind == "http") {
        gen::HttpOptions opts;
        opts.base_url = cfg.backend.base_url;
        opts.model = cfg.backend.model;
        opts.max_attempts = cfg.backend.max_attempts;
        opts.backoff_ms = cfg.backend.backoff_ms;
        return std::make_shared<gen::CachingBackend>(std::make_shared<gen::HttpBackend>(opts));
    }
    throw InvalidInput("unknown backend kind: " + cfg.backend.kind);
}

std::vector<RoleProfile> load_profiles(const std::string& path) {
    std::vector<RoleProfile> profiles;
    int line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            RoleProfile p{j.at("role_id").get<std::string>(),
                          j.value("name", j.at("role_id").get<std::string>()),
                          j.at("profile_text").get<std::string>()};
            if (auto v = validate_profile(p); !v.empty())
                throw InvalidInput("invalid profile: " + v.front());
            profiles.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad profile: ") + e.what(), line_no);
        }
    }
    return profiles;
}

std::vector<gen::Instruction> load_instructions(const std::string& path) {
    std::vector<gen::Instruction> out;
    int line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            out.push_back({j.at("role_id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad instruction: ") + e.what(), line_no);
        }
    }
    return out;
}

std::map<std::string, RoleProfile> profile_map(const std::vector<RoleProfile>& profiles) {
    std::map<std::string, RoleProfile> m;
    for (const auto& p : profiles) {
        if (!m.emplace(p.role_id, p).second)
            throw InvalidInput("duplicate role_id in corpus: " + p.role_id);
    }
    return m;
}

Manifest start_manifest(const std::string& command, const AppConfig& cfg) {
    Manifest m;
    m.command = command;
    m.config_digest = cfg.digest();
    m.started_at = now_iso8601();
    return m;
}

void finish_manifest(Manifest& m, const std::string& out_dir) {
    m.finished_at = now_iso8601();
    m.write(out_dir + "/manifest.json");
}

int run_extract_elements(const CommonArgs& args, const std::string& profiles_path) {
    AppConfig cfg = load_config(args);
    std::string path = profiles_path.empty() ? cfg.paths.profiles : profiles_path;
    auto profiles = load_profiles(path);
    Manifest manifest = start_manifest("extract-elements", cfg);
    manifest.add_input(path);

    gen::Pipeline pipeline(make_backend(cfg), cfg.run,
                           {cfg.backend.temperature, cfg.backend.max_tokens,
                            cfg.backend.max_attempts, cfg.backend.backoff_ms, false});
    std::string out;
    for (const auto& profile : profiles) {
        CoreElements e = pipeline.extract_elements(profile);
        nlohmann::ordered_json j;
        j["role_id"] = profile.role_id;
        if (e.emotion) j["emotion"] = *e.emotion;
        if (e.experience) j["experience"] = *e.experience;
        if (e.standpoint) j["standpoint"] = *e.standpoint;
        if (e.motivation) j["motivation"] = *e.motivation;
        out += j.dump() + "\n";
    }
    std::string out_path = args.out_dir + "/elements.jsonl";
    write_file(out_path, out);
    manifest.add_output(out_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("extracted elements for %zu profiles -> %s\n", profiles.size(), out_path.c_str());
    return 0;
}

int run_gen_ria(const CommonArgs& args, const std::string& instructions_path,
                const std::string& profiles_path) {
    AppConfig cfg = load_config(args);
    std::string ipath = instructions_path.empty() ? cfg.paths.instructions : instructions_path;
    std::string ppath = profiles_path.empty() ? cfg.paths.profiles : profiles_path;
    auto instructions = load_instructions(ipath);
    auto profiles = profile_map(load_profiles(ppath));

    Manifest manifest = start_manifest("gen-ria", cfg);
    manifest.add_input(ipath);
    manifest.add_input(ppath);

    std::vector<std::pair<gen::Instruction, RoleProfile>> inputs;
    for (const auto& instruction : instructions) {
        auto it = profiles.find(instruction.role_id);
        if (it == profiles.end())
            throw InvalidInput("instruction references unknown role_id: " + instruction.role_id);
        inputs.emplace_back(instruction, it->second);
    }

    gen::Pipeline pipeline(make_backend(cfg), cfg.run,
                           {cfg.backend.temperature, cfg.backend.max_tokens,
                            cfg.backend.max_attempts, cfg.backend.backoff_ms, false});
    gen::RiaResult result = pipeline.gen_ria_dataset(inputs);

    std::string out_path = args.out_dir + "/d_r.jsonl";
    gen::write_jsonl_records(result.records, out_path);
    manifest.add_output(out_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("wrote %zu records (%zu failures) -> %s\n", result.records.size(),
                result.failures.size(), out_path.c_str());
    for (const auto& f : result.failures)
        std::fprintf(stderr, "  failed input %zu: %s\n", f.input_index, f.reason.c_str());
    return 0;
}

int run_gen_rso(const CommonArgs& args, const std::string& x_logic_path,
                const std::string& x_story_path, const std::string& profiles_path) {
    AppConfig cfg = load_config(args);
    std::string lpath = x_logic_path.empty() ? cfg.paths.x_logic : x_logic_path;
    std::string spath = x_story_path.empty() ? cfg.paths.x_story : x_story_path;
    std::string ppath = profiles_path.empty() ? cfg.paths.profiles : profiles_path;

    auto x_logic = lpath.empty() ? std::vector<gen::Instruction>{} : load_instructions(lpath);
    auto x_story = spath.empty() ? std::vector<gen::Instruction>{} : load_instructions(spath);
    auto profiles = ppath.empty() ? std::map<std::string, RoleProfile>{}
                                  : profile_map(load_profiles(ppath));

    Manifest manifest = start_manifest("gen-rso", cfg);
    if (!lpath.empty()) manifest.add_input(lpath);
    if (!spath.empty()) manifest.add_input(spath);
    if (!ppath.empty()) manifest.add_input(ppath);

    gen::Pipeline pipeline(make_backend(cfg), cfg.run,
                           {cfg.backend.temperature, cfg.backend.max_tokens,
                            cfg.backend.max_attempts, cfg.backend.backoff_ms, false});
    gen::RsoResult result = pipeline.gen_rso_pairs(x_logic, x_story, profiles);

    std::string plus_path = args.out_dir + "/d_plus.jsonl";
    std::string minus_path = args.out_dir + "/d_minus.jsonl";
    std::string pairs_path = args.out_dir + "/pairs.jsonl";
    gen::write_jsonl_records(result.d_plus, plus_path);
    gen::write_jsonl_records(result.d_minus, minus_path);
    gen::write_jsonl_pairs(result.pairs, pairs_path);
    manifest.add_output(plus_path);
    manifest.add_output(minus_path);
    manifest.add_output(pairs_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("wrote %zu pairs (%zu failures) -> %s\n", result.pairs.size(),
                result.failures.size(), pairs_path.c_str());
    for (const auto& f : result.failures)
        std::fprintf(stderr, "  failed pair %zu: %s\n", f.input_index, f.reason.c_str());
    return 0;
}

int run_train(const CommonArgs& args, const std::string& stage_name, const std::string& data_path,
              const std::string& init_path, bool allow_no_ria) {
    AppConfig cfg = load_config(args);
    train::Stage stage = stage_name == "ria" ? train::Stage::Ria : train::Stage::Rso;

    Manifest manifest = start_manifest("train --stage " + stage_name, cfg);
    manifest.add_input(data_path);

    train::Checkpoint start;
    if (!init_path.empty()) {
        start = train::Checkpoint::load(init_path);
        manifest.add_input(init_path);
    } else {
        if (stage == train::Stage::Rso && !allow_no_ria)
            throw InvalidInput(
                "train --stage rso needs --init <identity-activation checkpoint>; the staging "
                "rule requires the activation stage first (--allow-no-ria overrides)");
        lm::ToyLM model =
            lm::ToyLM::randomized(lm::Vocab::ascii(), cfg.model, cfg.run.seed, 0.2);
        start = train::Checkpoint::capture(model, "init", cfg.digest());
    }

    lm::Vocab vocab = lm::Vocab::with_chars(start.vocab_chars);
    train::TrainData data;
    if (stage == train::Stage::Ria) {
        auto records = gen::read_jsonl_records(data_path);
        data = train::tokenize_records(records, vocab, start.dims.max_seq_len);
    } else {
        auto pairs = gen::read_jsonl_pairs(data_path);
        data = train::tokenize_pairs(pairs, vocab, start.dims.max_seq_len, cfg.rso_span);
    }
    if (!data.skipped.empty())
        std::fprintf(stderr, "skipped %zu over-length inputs\n", data.skipped.size());

    train::TrainOptions options;
    options.margin_space = cfg.margin_space;
    options.rso_span = cfg.rso_span;
    options.allow_no_ria = allow_no_ria;

    train::TrainResult result = train::train_stage(start, data, stage, cfg.run, options);

    std::string best_path = args.out_dir + "/checkpoint_best.ckpt";
    std::string last_path = args.out_dir + "/checkpoint_last.ckpt";
    std::string history_path = args.out_dir + "/history.csv";
    result.best.save(best_path);
    result.last.save(last_path);
    write_file(history_path, train::history_to_csv(result.history));
    manifest.add_output(best_path);
    manifest.add_output(last_path);
    manifest.add_output(history_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("stage %s: val %.6f -> %.6f (best epoch %d)\n", stage_name.c_str(),
                result.init_val_loss, result.best_val_loss, result.best_epoch);
    return 0;
}

int run_eval_mc(const CommonArgs& args, const std::string& items_path,
                const std::string& checkpoint_path) {
    AppConfig cfg = load_config(args);
    auto items = eval::load_mc_items(items_path);
    train::Checkpoint ckpt = train::Checkpoint::load(checkpoint_path);
    lm::ToyLM model = ckpt.restore();

    Manifest manifest = start_manifest("eval-mc", cfg);
    manifest.add_input(items_path);
    manifest.add_input(checkpoint_path);

    eval::EvalReport report = eval::run_mc(eval::toy_lm_scorer(model), items);

    std::string json_path = args.out_dir + "/report.json";
    std::string csv_path = args.out_dir + "/report.csv";
    auto digests = manifest.input_digests;
    digests["config"] = manifest.config_digest;
    digests["tool_version"] = kToolVersion;
    eval::write_report(report, json_path, csv_path, digests);
    manifest.add_output(json_path);
    manifest.add_output(csv_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("mc average %.2f over %zu dimensions (coverage %.2f)\n", report.average,
                report.per_dimension.size(), report.coverage);
    return 0;
}

int run_eval_rubric(const CommonArgs& args, const std::string& items_path, bool lenient) {
    AppConfig cfg = load_config(args);
    auto items = eval::load_rubric_items(items_path);
    auto backend = make_backend(cfg);

    Manifest manifest = start_manifest("eval-rubric", cfg);
    manifest.add_input(items_path);

    eval::EvalReport report = eval::run_rubric(*backend, items, !lenient);

    std::string json_path = args.out_dir + "/report.json";
    std::string csv_path = args.out_dir + "/report.csv";
    auto digests = manifest.input_digests;
    digests["config"] = manifest.config_digest;
    digests["tool_version"] = kToolVersion;
    eval::write_report(report, json_path, csv_path, digests);
    manifest.add_output(json_path);
    manifest.add_output(csv_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("rubric average %.2f over %zu dimensions\n", report.average,
                report.per_dimension.size());
    return 0;
}

int run_eval_traces(const CommonArgs& args, const std::string& samples_path,
                    const std::string& profiles_path, const std::string& checkpoint_path,
                    int max_new, bool lenient) {
    AppConfig cfg = load_config(args);
    auto records = gen::read_jsonl_records(samples_path);
    std::string ppath = profiles_path.empty() ? cfg.paths.profiles : profiles_path;
    auto profiles = profile_map(load_profiles(ppath));
    auto backend = make_backend(cfg);

    Manifest manifest = start_manifest("eval-traces", cfg);
    manifest.add_input(samples_path);
    manifest.add_input(ppath);

    std::vector<std::pair<RoleProfile, Sample>> samples;
    for (const auto& r : records) {
        auto it = profiles.find(r.sample.role_id);
        if (it == profiles.end())
            throw InvalidInput("record references unknown role_id: " + r.sample.role_id);
        samples.emplace_back(it->second, r.sample);
    }

    // With a checkpoint, traces are regenerated from the toy model under the
    // configured thinking mode before judging; this is the decoding-baseline
    // surface (full/zero/less/more).
    if (!checkpoint_path.empty()) {
        manifest.add_input(checkpoint_path);
        train::Checkpoint ckpt = train::Checkpoint::load(checkpoint_path);
        lm::ToyLM model = ckpt.restore();
        uint64_t seed = cfg.run.seed;
        for (auto& [profile, sample] : samples) {
            std::vector<lm::TokenId> prompt = {lm::Vocab::kBos};
            auto ids = model.vocab().encode(sample.query + "\n", /*strict=*/false);
            prompt.insert(prompt.end(), ids.begin(), ids.end());
            size_t budget = size_t(model.dims().max_seq_len) - size_t(std::min(
                                max_new, model.dims().max_seq_len / 2));
            if (prompt.size() > budget)
                prompt = std::vector<lm::TokenId>(prompt.end() - long(budget), prompt.end());
            lm::GenerateResult gen_result =
                model.generate(prompt, cfg.run.think_mode, max_new, seed++);
            auto [reasoning, answer] =
                trace::parse_trace(model.vocab().decode(gen_result.tokens), /*strict=*/false);
            sample.reasoning = reasoning;
            sample.answer = answer.empty() ? "(no answer)" : answer;
        }
    }

    eval::TraceReport report = eval::trace_eval_report(*backend, samples, !lenient);

    nlohmann::ordered_json j;
    j["coherence"] = report.coherence;
    j["relevance"] = report.relevance;
    j["effectiveness"] = report.effectiveness;
    j["conciseness"] = report.conciseness;
    j["n_samples"] = report.n_samples;
    std::string json_path = args.out_dir + "/trace_report.json";
    write_file(json_path, j.dump(2) + "\n");
    std::string csv_path = args.out_dir + "/trace_report.csv";
    char csv[256];
    std::snprintf(csv, sizeof(csv),
                  "coherence,relevance,effectiveness,conciseness\n%.4f,%.4f,%.4f,%.4f\n",
                  report.coherence, report.relevance, report.effectiveness, report.conciseness);
    write_file(csv_path, csv);
    manifest.add_output(json_path);
    manifest.add_output(csv_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("traces: coherence %.2f relevance %.2f effectiveness %.2f conciseness %.2f\n",
                report.coherence, report.relevance, report.effectiveness, report.conciseness);
    return 0;
}

int run_probe_style(const CommonArgs& args, const std::vector<std::string>& record_paths,
                    const std::string& checkpoint_path, int layer, const std::string& method) {
    AppConfig cfg = load_config(args);
    train::Checkpoint ckpt = train::Checkpoint::load(checkpoint_path);
    lm::ToyLM model = ckpt.restore();

    Manifest manifest = start_manifest("probe-style", cfg);
    manifest.add_input(checkpoint_path);

    std::vector<Sample> samples;
    for (const auto& path : record_paths) {
        manifest.add_input(path);
        for (const auto& r : gen::read_jsonl_records(path)) samples.push_back(r.sample);
    }

    if (layer < 0) layer = model.dims().n_layers - 1;  // deep layer default
    probe::ProbeMatrix pm = probe::collect(model, samples, layer);
    auto coords = probe::project_2d(
        pm, method == "tsne" ? probe::Projection::Tsne : probe::Projection::Pca, cfg.run.seed);
    double score = probe::separation_score(pm.rows, pm.labels);

    std::string plot_path = args.out_dir + "/style_plot.csv";
    probe::emit_plot_data(coords, pm.labels, plot_path);
    nlohmann::ordered_json j;
    j["separation_score"] = score;
    j["layer"] = layer;
    j["method"] = method;
    j["n_points"] = pm.rows.size();
    j["n_skipped"] = pm.skipped.size();
    j["source_digest"] = pm.source_digest;
    std::string score_path = args.out_dir + "/probe.json";
    write_file(score_path, j.dump(2) + "\n");
    manifest.add_output(plot_path);
    manifest.add_output(score_path);
    finish_manifest(manifest, args.out_dir);
    std::printf("separation score %.4f over %zu points (layer %d, %s)\n", score, pm.rows.size(),
                layer, method.c_str());
    return 0;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
    std::printf("%-28s %-12s %s\n", "report", "average", "dimensions");
    for (const auto& path : inputs) {
        json j = json::parse(read_file(path));
        double average = j.value("average", 0.0);
        size_t dims = j.contains("per_dimension") ? j["per_dimension"].size() : 0;
        std::printf("%-28s %-12.3f %zu\n", fs::path(path).filename().c_str(), average, dims);
        if (!out_dir.empty()) {
            std::string csv = "dimension,mean\n";
            if (j.contains("per_dimension")) {
                for (auto& [k, v] : j["per_dimension"].items())
                    csv += k + "," + std::to_string(v.get<double>()) + "\n";
            }
            csv += "average," + std::to_string(average) + "\n";
            write_file(out_dir + "/" + fs::path(path).stem().string() + ".csv", csv);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"role-aware reasoning toolkit"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* extract = app.add_subcommand("extract-elements", "extract core identity elements");
    std::string profiles_path;
    add_common(extract, args);
    extract->add_option("--profiles", profiles_path, "profiles jsonl");

    auto* gen_ria = app.add_subcommand("gen-ria", "build the identity-activation dataset");
    std::string instructions_path;
    add_common(gen_ria, args);
    gen_ria->add_option("--instructions", instructions_path, "instructions jsonl");
    gen_ria->add_option("--profiles", profiles_path, "profiles jsonl");

    auto* gen_rso = app.add_subcommand("gen-rso", "build style preference pairs");
    std::string x_logic_path, x_story_path;
    add_common(gen_rso, args);
    gen_rso->add_option("--x-logic", x_logic_path, "logic-scenario instructions jsonl");
    gen_rso->add_option("--x-story", x_story_path, "story-scenario instructions jsonl");
    gen_rso->add_option("--profiles", profiles_path, "profiles jsonl");

    auto* train_cmd = app.add_subcommand("train", "run one training stage");
    std::string stage_name, data_path, init_path;
    bool allow_no_ria = false;
    add_common(train_cmd, args);
    train_cmd->add_option("--stage", stage_name, "ria|rso")->required()
        ->check(CLI::IsMember({"ria", "rso"}));
    train_cmd->add_option("--data", data_path, "records/pairs jsonl")->required();
    train_cmd->add_option("--init", init_path, "starting checkpoint");
    train_cmd->add_flag("--allow-no-ria", allow_no_ria, "skip the staging lineage rule");

    auto* eval_mc = app.add_subcommand("eval-mc", "multiple-choice benchmark");
    std::string items_path, checkpoint_path;
    add_common(eval_mc, args);
    eval_mc->add_option("--items", items_path, "mc items jsonl")->required();
    eval_mc->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();

    auto* eval_rubric = app.add_subcommand("eval-rubric", "1-5 rubric benchmark");
    bool lenient = false;
    add_common(eval_rubric, args);
    eval_rubric->add_option("--items", items_path, "rubric items jsonl")->required();
    eval_rubric->add_flag("--lenient", lenient, "tolerate wrapped judge replies");

    auto* eval_traces = app.add_subcommand("eval-traces", "four-metric trace judging");
    std::string samples_path, traces_checkpoint;
    int max_new = 96;
    add_common(eval_traces, args);
    eval_traces->add_option("--samples", samples_path, "records jsonl")->required();
    eval_traces->add_option("--profiles", profiles_path, "profiles jsonl");
    eval_traces->add_option("--checkpoint", traces_checkpoint,
                            "regenerate traces from this model under --think-mode");
    eval_traces->add_option("--max-new", max_new, "generation budget per trace");
    eval_traces->add_flag("--lenient", lenient, "tolerate wrapped judge replies");

    auto* probe_cmd = app.add_subcommand("probe-style", "hidden-state style separation");
    std::vector<std::string> record_paths;
    int layer = -1;
    std::string method = "pca";
    add_common(probe_cmd, args);
    probe_cmd->add_option("--records", record_paths, "style-tagged records jsonl")->required();
    probe_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    probe_cmd->add_option("--layer", layer, "layer index (default: last)");
    probe_cmd->add_option("--method", method, "pca|tsne")->check(CLI::IsMember({"pca", "tsne"}));

    auto* report_cmd = app.add_subcommand("report", "summarize report files");
    std::vector<std::string> report_inputs;
    std::string report_out;
    report_cmd->add_option("--in", report_inputs, "report json files")->required();
    report_cmd->add_option("--out", report_out, "directory for csv mirrors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (extract->parsed()) return run_extract_elements(args, profiles_path);
        if (gen_ria->parsed()) return run_gen_ria(args, instructions_path, profiles_path);
        if (gen_rso->parsed()) return run_gen_rso(args, x_logic_path, x_story_path, profiles_path);
        if (train_cmd->parsed())
            return run_train(args, stage_name, data_path, init_path, allow_no_ria);
        if (eval_mc->parsed()) return run_eval_mc(args, items_path, checkpoint_path);
        if (eval_rubric->parsed()) return run_eval_rubric(args, items_path, lenient);
        if (eval_traces->parsed())
            return run_eval_traces(args, samples_path, profiles_path, traces_checkpoint, max_new,
                                   lenient);
        if (probe_cmd->parsed())
            return run_probe_style(args, record_paths, checkpoint_path, layer, method);
        if (report_cmd->parsed()) return run_report(report_inputs, report_out);
    } catch (const TrainingDiverged& e) {
        std::fprintf(stderr, "training diverged: %s\n", e.what());
        return 3;
    } catch (const BackendError& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return 2;
    } catch (const ExtractionError& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
