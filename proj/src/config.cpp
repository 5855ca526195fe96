#include "rar/config.hpp"

#include <set>

#include "json.hpp"

namespace rar {

using ordered_json = nlohmann::ordered_json;

std::string AppConfig::to_json() const {
    ordered_json j;
    j["run"] = {
        {"seed", run.seed},
        {"learning_rate", run.learning_rate},
        {"batch_size", run.batch_size},
        {"max_seq_len", run.max_seq_len},
        {"epochs", run.epochs},
        {"warmup_ratio", run.warmup_ratio},
        {"weight_decay", run.weight_decay},
        {"grad_clip_norm", run.grad_clip_norm},
        {"schedule", to_string(run.schedule)},
        {"val_fraction", run.val_fraction},
        {"ria_elements", run.ria_elements},
        {"think_mode", to_string(run.think_mode)},
        {"lora_rank", run.lora_rank},
        {"lora_alpha", run.lora_alpha},
        {"lora_dropout", run.lora_dropout},
    };
    j["model"] = {
        {"n_layers", model.n_layers},
        {"d_model", model.d_model},
        {"max_seq_len", model.max_seq_len},
    };
    j["margin_space"] =
        margin_space == train::MarginSpace::LogProb ? "logprob" : "logprob_mean";
    j["rso_span"] = rso_span == train::RsoSpan::Full ? "full" : "trace_only";
    j["backend"] = {
        {"kind", backend.kind},
        {"base_url", backend.base_url},
        {"model", backend.model},
        {"fixture", backend.fixture},
        {"synthesize", backend.synthesize},
        {"temperature", backend.temperature},
        {"max_tokens", backend.max_tokens},
        {"max_attempts", backend.max_attempts},
        {"backoff_ms", backend.backoff_ms},
    };
    j["paths"] = {
        {"profiles", paths.profiles},
        {"instructions", paths.instructions},
        {"x_logic", paths.x_logic},
        {"x_story", paths.x_story},
        {"template_dir", paths.template_dir},
    };
    return j.dump(2) + "\n";
}

AppConfig AppConfig::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    AppConfig cfg;
    if (j.contains("run")) {
        const auto& r = j["run"];
        cfg.run.seed = r.value("seed", cfg.run.seed);
        cfg.run.learning_rate = r.value("learning_rate", cfg.run.learning_rate);
        cfg.run.batch_size = r.value("batch_size", cfg.run.batch_size);
        cfg.run.max_seq_len = r.value("max_seq_len", cfg.run.max_seq_len);
        cfg.run.epochs = r.value("epochs", cfg.run.epochs);
        cfg.run.warmup_ratio = r.value("warmup_ratio", cfg.run.warmup_ratio);
        cfg.run.weight_decay = r.value("weight_decay", cfg.run.weight_decay);
        cfg.run.grad_clip_norm = r.value("grad_clip_norm", cfg.run.grad_clip_norm);
        if (r.contains("schedule")) cfg.run.schedule = schedule_from_string(r["schedule"]);
        cfg.run.val_fraction = r.value("val_fraction", cfg.run.val_fraction);
        if (r.contains("ria_elements"))
            cfg.run.ria_elements = r["ria_elements"].get<std::set<std::string>>();
        if (r.contains("think_mode")) cfg.run.think_mode = think_mode_from_string(r["think_mode"]);
        cfg.run.lora_rank = r.value("lora_rank", cfg.run.lora_rank);
        cfg.run.lora_alpha = r.value("lora_alpha", cfg.run.lora_alpha);
        cfg.run.lora_dropout = r.value("lora_dropout", cfg.run.lora_dropout);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        cfg.model.n_layers = m.value("n_layers", cfg.model.n_layers);
        cfg.model.d_model = m.value("d_model", cfg.model.d_model);
        cfg.model.max_seq_len = m.value("max_seq_len", cfg.model.max_seq_len);
    }
    if (j.contains("margin_space"))
        cfg.margin_space = j["margin_space"] == "logprob_mean" ? train::MarginSpace::LogProbMean
                                                               : train::MarginSpace::LogProb;
    if (j.contains("rso_span"))
        cfg.rso_span =
            j["rso_span"] == "trace_only" ? train::RsoSpan::TraceOnly : train::RsoSpan::Full;
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        cfg.backend.kind = b.value("kind", cfg.backend.kind);
        cfg.backend.base_url = b.value("base_url", cfg.backend.base_url);
        cfg.backend.model = b.value("model", cfg.backend.model);
        cfg.backend.fixture = b.value("fixture", cfg.backend.fixture);
        cfg.backend.synthesize = b.value("synthesize", cfg.backend.synthesize);
        cfg.backend.temperature = b.value("temperature", cfg.backend.temperature);
        cfg.backend.max_tokens = b.value("max_tokens", cfg.backend.max_tokens);
        cfg.backend.max_attempts = b.value("max_attempts", cfg.backend.max_attempts);
        cfg.backend.backoff_ms = b.value("backoff_ms", cfg.backend.backoff_ms);
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        cfg.paths.profiles = p.value("profiles", "");
        cfg.paths.instructions = p.value("instructions", "");
        cfg.paths.x_logic = p.value("x_logic", "");
        cfg.paths.x_story = p.value("x_story", "");
        cfg.paths.template_dir = p.value("template_dir", "");
    }
    cfg.run.validate();
    return cfg;
}

AppConfig AppConfig::load(const std::string& path) { return from_json(read_file(path)); }

std::string AppConfig::digest() const { return sha256_hex(to_json()); }

}  // namespace rar
