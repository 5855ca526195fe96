#include "rar/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "rar/trace.hpp"

namespace rar::train {

using nlohmann::json;

std::string to_string(Stage s) { return s == Stage::Ria ? "ria" : "rso"; }

lm::ToyLM Checkpoint::restore() const {
    lm::ToyLM model(lm::Vocab::with_chars(vocab_chars), dims);
    if (model.param_count() != params.size())
        throw InvalidInput("checkpoint parameter count does not match layout");
    model.params() = params;
    return model;
}

Checkpoint Checkpoint::capture(const lm::ToyLM& model, const std::string& stage,
                               const std::string& config_digest) {
    Checkpoint ckpt;
    ckpt.dims = model.dims();
    std::string chars;
    for (size_t i = lm::Vocab::kReservedCount; i < model.vocab().size(); ++i)
        chars += model.vocab().symbol(lm::TokenId(i));
    ckpt.vocab_chars = chars;
    ckpt.params = model.params();
    ckpt.stage = stage;
    ckpt.config_digest = config_digest;
    return ckpt;
}

namespace {

constexpr char kMagic[8] = {'R', 'A', 'R', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char(v >> (8 * i)));
}

void put_doubles(std::string& out, const std::vector<double>& values) {
    // Stored little-endian; this writer targets little-endian hosts.
    static_assert(sizeof(double) == 8);
    size_t at = out.size();
    out.resize(out.size() + values.size() * 8);
    std::memcpy(out.data() + at, values.data(), values.size() * 8);
}

uint32_t get_u32(const std::string& in, size_t& pos) {
    if (pos + 4 > in.size()) throw InvalidInput("truncated checkpoint");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(in[pos + size_t(i)])) << (8 * i);
    pos += 4;
    return v;
}

std::vector<double> get_doubles(const std::string& in, size_t& pos, size_t count) {
    if (pos + count * 8 > in.size()) throw InvalidInput("truncated checkpoint");
    std::vector<double> values(count);
    std::memcpy(values.data(), in.data() + pos, count * 8);
    pos += count * 8;
    return values;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    json layout = json::array();
    {
        lm::ToyLM shape(lm::Vocab::with_chars(vocab_chars), dims);
        for (const auto& e : shape.layout())
            layout.push_back({{"name", e.name}, {"offset", e.offset}, {"size", e.size}});
    }
    json header = {
        {"version", 1},
        {"n_layers", dims.n_layers},
        {"d_model", dims.d_model},
        {"max_seq_len", dims.max_seq_len},
        {"vocab_chars", vocab_chars},
        {"param_count", params.size()},
        {"layout", layout},
        {"has_optimizer", !adam_m.empty()},
        {"adam_t", adam_t},
        {"step", step},
        {"stage", stage},
        {"config_digest", config_digest},
    };
    std::string body(kMagic, sizeof(kMagic));
    std::string header_text = header.dump();
    put_u32(body, uint32_t(header_text.size()));
    body += header_text;
    put_doubles(body, params);
    if (!adam_m.empty()) {
        put_doubles(body, adam_m);
        put_doubles(body, adam_v);
    }
    write_file(path, body);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::string body = read_file(path);
    if (body.size() < sizeof(kMagic) || std::memcmp(body.data(), kMagic, sizeof(kMagic)) != 0)
        throw InvalidInput("not a checkpoint file: " + path);
    size_t pos = sizeof(kMagic);
    uint32_t header_len = get_u32(body, pos);
    if (pos + header_len > body.size()) throw InvalidInput("truncated checkpoint header");
    json header = json::parse(body.substr(pos, header_len));
    pos += header_len;

    Checkpoint ckpt;
    ckpt.dims.n_layers = header.at("n_layers").get<int>();
    ckpt.dims.d_model = header.at("d_model").get<int>();
    ckpt.dims.max_seq_len = header.at("max_seq_len").get<int>();
    ckpt.vocab_chars = header.at("vocab_chars").get<std::string>();
    ckpt.adam_t = header.value("adam_t", int64_t(0));
    ckpt.step = header.value("step", int64_t(0));
    ckpt.stage = header.value("stage", "init");
    ckpt.config_digest = header.value("config_digest", "");
    size_t count = header.at("param_count").get<size_t>();
    ckpt.params = get_doubles(body, pos, count);
    if (header.value("has_optimizer", false)) {
        ckpt.adam_m = get_doubles(body, pos, count);
        ckpt.adam_v = get_doubles(body, pos, count);
    }
    return ckpt;
}

std::string history_to_csv(const std::vector<HistoryRow>& rows) {
    std::ostringstream out;
    out << "step,split,stage,loss\n";
    out.precision(17);
    for (const auto& r : rows) out << r.step << ',' << r.split << ',' << r.stage << ',' << r.loss << '\n';
    return out.str();
}

std::vector<HistoryRow> history_from_csv(const std::string& csv) {
    std::vector<HistoryRow> rows;
    auto lines = split_lines(csv);
    for (size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::istringstream ss(lines[i]);
        std::string step, split, stage, loss;
        std::getline(ss, step, ',');
        std::getline(ss, split, ',');
        std::getline(ss, stage, ',');
        std::getline(ss, loss, ',');
        rows.push_back({std::stoll(step), split, stage, std::stod(loss)});
    }
    return rows;
}

namespace {

std::string render_prompt_text(const Sample& s) {
    std::string text = s.system_prompt;
    if (!text.empty()) text += '\n';
    for (const auto& turn : s.context) {
        text += turn.speaker == Speaker::User ? "user: " : "character: ";
        text += turn.text;
        text += '\n';
    }
    text += "user: " + s.query + "\n";
    return text;
}

std::vector<lm::TokenId> target_tokens(const lm::Vocab& vocab, const std::string& reasoning,
                                       const std::string& answer, RsoSpan span) {
    std::string text = span == RsoSpan::TraceOnly
                           ? trace::kThinkOpen + reasoning + trace::kThinkClose
                           : trace::assemble(reasoning, answer);
    auto y = vocab.encode(text, /*strict=*/false);
    y.push_back(lm::Vocab::kEos);
    return y;
}

std::optional<ScoredSeq> make_scored(const lm::Vocab& vocab, const std::string& prompt_text,
                                     const std::string& reasoning, const std::string& answer,
                                     int max_seq_len, RsoSpan span) {
    ScoredSeq seq;
    seq.y = target_tokens(vocab, reasoning, answer, span);
    if (int(seq.y.size()) >= max_seq_len) return std::nullopt;
    seq.x.push_back(lm::Vocab::kBos);
    auto prompt_ids = vocab.encode(prompt_text, /*strict=*/false);
    seq.x.insert(seq.x.end(), prompt_ids.begin(), prompt_ids.end());
    size_t budget = size_t(max_seq_len) - seq.y.size();
    if (seq.x.size() > budget) {
        // keep the most recent prompt tokens
        std::vector<lm::TokenId> tail(seq.x.end() - long(budget), seq.x.end());
        seq.x = std::move(tail);
    }
    return seq;
}

}  // namespace

TrainData tokenize_records(const std::vector<gen::GenRecord>& records, const lm::Vocab& vocab,
                           int max_seq_len) {
    TrainData data;
    for (size_t i = 0; i < records.size(); ++i) {
        const Sample& s = records[i].sample;
        auto seq = make_scored(vocab, render_prompt_text(s), s.reasoning, s.answer, max_seq_len,
                               RsoSpan::Full);
        if (seq) data.sequences.push_back(std::move(*seq));
        else data.skipped.push_back(i);
    }
    return data;
}

TrainData tokenize_pairs(const std::vector<PreferencePair>& pairs, const lm::Vocab& vocab,
                         int max_seq_len, RsoSpan span) {
    TrainData data;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const PreferencePair& p = pairs[i];
        TokenPair tp;
        tp.x.push_back(lm::Vocab::kBos);
        auto prompt_ids = vocab.encode(p.prompt.instruction + "\n", /*strict=*/false);
        tp.x.insert(tp.x.end(), prompt_ids.begin(), prompt_ids.end());
        tp.y_plus = target_tokens(vocab, p.chosen.reasoning, p.chosen.answer, span);
        tp.y_minus = target_tokens(vocab, p.rejected.reasoning, p.rejected.answer, span);
        size_t longest = std::max(tp.y_plus.size(), tp.y_minus.size());
        if (int(longest) >= max_seq_len) {
            data.skipped.push_back(i);
            continue;
        }
        size_t budget = size_t(max_seq_len) - longest;
        if (tp.x.size() > budget)
            tp.x = std::vector<lm::TokenId>(tp.x.end() - long(budget), tp.x.end());
        data.pairs.push_back(std::move(tp));
    }
    return data;
}

TrainData tokenize_record_pairs(const std::vector<gen::GenRecord>& d_plus,
                                const std::vector<gen::GenRecord>& d_minus, const lm::Vocab& vocab,
                                int max_seq_len, RsoSpan span) {
    if (d_plus.size() != d_minus.size())
        throw PairIntegrityError("positive and negative sets differ in size");
    std::vector<PreferencePair> pairs;
    for (size_t i = 0; i < d_plus.size(); ++i) {
        const Sample& plus = d_plus[i].sample;
        const Sample& minus = d_minus[i].sample;
        if (plus.query != minus.query || plus.role_id != minus.role_id)
            throw PairIntegrityError("pair " + std::to_string(i) +
                                     " does not share a prompt between chosen and rejected");
        PreferencePair p;
        p.id = "pair-" + std::to_string(i);
        p.prompt = {plus.role_id, plus.scenario, plus.query};
        p.chosen = {plus.reasoning, plus.answer};
        p.rejected = {minus.reasoning, minus.answer};
        pairs.push_back(std::move(p));
    }
    return tokenize_pairs(pairs, vocab, max_seq_len, span);
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double scale = max_norm / norm;
        for (double& g : grad) g *= scale;
    }
    return norm;
}

namespace {

struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void step(std::vector<double>& params, std::span<const double> grad, std::vector<double>& m,
              std::vector<double>& v, int64_t t, double lr, double weight_decay) {
        const double bc1 = 1.0 - std::pow(beta1, double(t));
        const double bc2 = 1.0 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            // decoupled weight decay
            params[i] -= lr * (update + weight_decay * params[i]);
        }
    }
};

double lr_at(const RunConfig& cfg, int64_t step, int64_t total_steps) {
    int64_t warmup = int64_t(std::llround(cfg.warmup_ratio * double(total_steps)));
    if (warmup > 0 && step < warmup) return cfg.learning_rate * double(step + 1) / double(warmup);
    if (cfg.schedule == Schedule::Constant) return cfg.learning_rate;
    double denom = double(std::max<int64_t>(1, total_steps - warmup));
    double progress = double(step - warmup) / denom;
    progress = std::clamp(progress, 0.0, 1.0);
    return cfg.learning_rate * 0.5 * (1.0 + std::cos(progress * M_PI));
}

}  // namespace

TrainResult train_stage(const Checkpoint& start, const TrainData& data, Stage stage,
                        const RunConfig& cfg, const TrainOptions& options) {
    cfg.validate();
    if (stage == Stage::Rso && start.stage != "ria" && !options.allow_no_ria)
        throw InvalidInput(
            "preference stage requires an identity-activation checkpoint "
            "(stage 'ria'); pass allow_no_ria to override for the ablation");

    const size_t n_total = stage == Stage::Ria ? data.sequences.size() : data.pairs.size();
    if (n_total < 2) throw InvalidInput("need at least 2 examples to split train/val");

    lm::ToyLM model = start.restore();
    const size_t p_count = model.param_count();
    // A checkpoint of the same stage resumes its run (step counter, optimizer
    // moments, schedule position); a checkpoint from another stage starts a
    // fresh optimization from its parameters.
    const bool resuming = start.stage == to_string(stage);
    std::vector<double> adam_m = resuming ? start.adam_m : std::vector<double>{};
    std::vector<double> adam_v = resuming ? start.adam_v : std::vector<double>{};
    if (adam_m.size() != p_count) adam_m.assign(p_count, 0.0);
    if (adam_v.size() != p_count) adam_v.assign(p_count, 0.0);
    int64_t adam_t = resuming ? start.adam_t : 0;

    // seed-determined split: the held-out block is the front of one fixed shuffle
    std::vector<size_t> order(n_total);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 split_rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), split_rng);
    size_t n_val = std::max<size_t>(1, size_t(std::llround(cfg.val_fraction * double(n_total))));
    if (n_val >= n_total) n_val = n_total - 1;
    std::vector<size_t> val_idx(order.begin(), order.begin() + long(n_val));
    std::vector<size_t> train_idx(order.begin() + long(n_val), order.end());

    auto eval_loss = [&](const lm::ToyLM& m, const std::vector<size_t>& idx) {
        // mean over examples of the per-example objective (token-sum NLL or
        // pair softplus), matching the training objective
        double total = 0.0;
        for (size_t i : idx) {
            if (stage == Stage::Ria) {
                total += sft_loss(m, {data.sequences[i]}, Reduction::Sum).scalar;
            } else {
                total += rso_loss(m, {data.pairs[i]}, options.margin_space).scalar;
            }
        }
        return total / double(idx.size());
    };

    TrainResult result;
    const int64_t steps_per_epoch =
        int64_t((train_idx.size() + size_t(cfg.batch_size) - 1) / size_t(cfg.batch_size));
    const int64_t total_steps = steps_per_epoch * cfg.epochs;
    int64_t global_step = resuming ? start.step : 0;

    result.init_val_loss = eval_loss(model, val_idx);
    result.history.push_back({global_step, "val", to_string(stage), result.init_val_loss});
    result.best_val_loss = result.init_val_loss;
    result.best = Checkpoint::capture(model, to_string(stage), start.config_digest);
    result.best.step = global_step;

    Adam adam;
    std::vector<double> grad(p_count, 0.0);
    int start_epoch = int(global_step / std::max<int64_t>(1, steps_per_epoch));

    int stop_epoch = options.stop_after_epochs > 0
                         ? std::min(cfg.epochs, options.stop_after_epochs)
                         : cfg.epochs;
    for (int epoch = start_epoch; epoch < stop_epoch; ++epoch) {
        // per-epoch order depends only on (seed, epoch): resumable runs see
        // the same shuffles
        std::vector<size_t> epoch_order = train_idx;
        std::mt19937_64 epoch_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + uint64_t(epoch) + 1);
        std::shuffle(epoch_order.begin(), epoch_order.end(), epoch_rng);

        double epoch_loss_total = 0.0;
        int64_t batches = 0;
        for (size_t at = 0; at < epoch_order.size(); at += size_t(cfg.batch_size)) {
            size_t end = std::min(epoch_order.size(), at + size_t(cfg.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            if (stage == Stage::Ria) {
                std::vector<ScoredSeq> batch;
                for (size_t i = at; i < end; ++i) batch.push_back(data.sequences[epoch_order[i]]);
                // token-sum per example, mean over the batch
                double n = double(batch.size());
                for (const auto& ex : batch) {
                    double lp = model.seq_log_prob_grad(ex.x, ex.y, -1.0 / n, grad);
                    batch_loss += -lp / n;
                }
            } else {
                std::vector<TokenPair> batch;
                for (size_t i = at; i < end; ++i) batch.push_back(data.pairs[epoch_order[i]]);
                batch_loss = rso_loss_grad(model, batch, options.margin_space, grad).scalar;
            }
            if (!std::isfinite(batch_loss)) throw TrainingDiverged("loss is not finite", global_step);
            clip_grad_norm(grad, cfg.grad_clip_norm);
            double lr = lr_at(cfg, global_step, total_steps);
            adam.step(model.params(), grad, adam_m, adam_v, ++adam_t, lr, cfg.weight_decay);
            ++global_step;
            epoch_loss_total += batch_loss;
            ++batches;
        }

        double train_loss = epoch_loss_total / double(std::max<int64_t>(1, batches));
        double val_loss = eval_loss(model, val_idx);
        if (!std::isfinite(val_loss)) throw TrainingDiverged("validation loss is not finite", global_step);
        result.history.push_back({global_step, "train", to_string(stage), train_loss});
        result.history.push_back({global_step, "val", to_string(stage), val_loss});

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best = Checkpoint::capture(model, to_string(stage), start.config_digest);
            result.best.step = global_step;
            result.best_epoch = epoch + 1;
        }
    }

    result.last = Checkpoint::capture(model, to_string(stage), start.config_digest);
    result.last.adam_m = std::move(adam_m);
    result.last.adam_v = std::move(adam_v);
    result.last.adam_t = adam_t;
    result.last.step = global_step;
    return result;
}

}  // namespace rar::train
