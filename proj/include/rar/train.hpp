#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rar/jsonl.hpp"
#include "rar/loss.hpp"
#include "rar/types.hpp"

namespace rar::train {

enum class Stage { Ria, Rso };

std::string to_string(Stage s);

// Model parameters plus optimizer state; everything needed to continue a run
// bit-for-bit. Serialized as a versioned binary file with a named-parameter
// layout and little-endian 64-bit floats.
struct Checkpoint {
    lm::ModelDims dims;
    std::string vocab_chars;  // non-reserved symbols, in order
    std::vector<double> params;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    int64_t adam_t = 0;
    int64_t step = 0;
    std::string stage = "init";  // init | ria | rso
    std::string config_digest;

    lm::ToyLM restore() const;
    static Checkpoint capture(const lm::ToyLM& model, const std::string& stage,
                              const std::string& config_digest);

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

struct HistoryRow {
    int64_t step;
    std::string split;  // train | val
    std::string stage;  // ria | rso
    double loss;
};

std::string history_to_csv(const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> history_from_csv(const std::string& csv);

struct TrainOptions {
    MarginSpace margin_space = MarginSpace::LogProb;
    RsoSpan rso_span = RsoSpan::Full;
    bool allow_no_ria = false;  // the staging rule override for the ablation
    // Stop after this many epochs while keeping the cfg.epochs schedule
    // horizon, so a later resume continues the same run. 0 = run to the end.
    int stop_after_epochs = 0;
};

struct TrainResult {
    Checkpoint best;          // minimum validation loss
    Checkpoint last;
    std::vector<HistoryRow> history;
    double init_val_loss = 0.0;
    double best_val_loss = 0.0;
    int best_epoch = 0;
};

// Either dataset kind, tokenized.
struct TrainData {
    std::vector<ScoredSeq> sequences;   // identity-activation stage
    std::vector<TokenPair> pairs;       // style-preference stage
    std::vector<size_t> skipped;        // inputs dropped for length
};

// Tokenization of persisted records. Prompts longer than the model window are
// left-truncated (most recent context wins); records whose target alone
// exceeds the window are skipped and reported.
TrainData tokenize_records(const std::vector<gen::GenRecord>& records, const lm::Vocab& vocab,
                           int max_seq_len);
TrainData tokenize_pairs(const std::vector<PreferencePair>& pairs, const lm::Vocab& vocab,
                         int max_seq_len, RsoSpan span = RsoSpan::Full);
// Pairing from the two record streams; queries must match index-for-index or
// PairIntegrityError is thrown.
TrainData tokenize_record_pairs(const std::vector<gen::GenRecord>& d_plus,
                                const std::vector<gen::GenRecord>& d_minus, const lm::Vocab& vocab,
                                int max_seq_len, RsoSpan span = RsoSpan::Full);

// Runs one optimization stage: seeded shuffles, linear warmup into the
// configured schedule, decoupled weight decay, global-norm clipping, per-epoch
// train/val rows, best checkpoint by validation loss. The preference stage
// refuses to start from anything but an identity-activation checkpoint unless
// options.allow_no_ria is set. Throws TrainingDiverged when the loss stops
// being finite.
TrainResult train_stage(const Checkpoint& start, const TrainData& data, Stage stage,
                        const RunConfig& cfg, const TrainOptions& options = {});

// Global L2 clip; returns the pre-clip norm.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace rar::train
