#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rar/types.hpp"
#include "rar/vocab.hpp"

namespace rar::lm {

struct ModelDims {
    int n_layers = 2;
    int d_model = 64;
    int max_seq_len = 256;
};

struct ParamEntry {
    std::string name;
    size_t offset;
    size_t size;
};

struct GenerateOptions {
    double temperature = 1.0;
    int more_substitutions = 2;          // k for the extended-thinking mode
    std::string continuation_text = "wait";
    std::string less_trace_text = "<think>Okay.</think>";  // placeholder trace, configurable
};

struct GenerateResult {
    std::vector<TokenId> tokens;   // sampled output, eos excluded
    bool truncated = false;        // ran out of budget before eos
    int think_substitutions = 0;   // closes replaced in extended mode
};

// Small autoregressive language model: character embeddings feeding a stack
// of gated recurrent (GRU) layers and a softmax head. Recurrence makes
// causality structural, and the whole training path runs in double precision
// so finite-difference gradient checks are meaningful.
class ToyLM {
  public:
    ToyLM(Vocab vocab, ModelDims dims);

    static ToyLM randomized(Vocab vocab, ModelDims dims, uint64_t seed, double init_std = 0.2);

    const Vocab& vocab() const { return vocab_; }
    const ModelDims& dims() const { return dims_; }
    const std::vector<ParamEntry>& layout() const { return layout_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    size_t param_count() const { return params_.size(); }

    // Recurrent state: one hidden vector per layer, zeros initially.
    struct State {
        std::vector<std::vector<double>> h;
    };
    State initial_state() const;
    void step(State& state, TokenId token) const;
    // Distribution over the next token given the current state.
    std::vector<double> next_logits(const State& state) const;

    // Teacher-forced sum of per-token conditional log probabilities
    // log p(y | x); exact, always <= 0. Throws LengthError when
    // |x|+|y| exceeds max_seq_len and InvalidInput when y is empty.
    double seq_log_prob(std::span<const TokenId> x, std::span<const TokenId> y) const;

    // Same quantity, and additionally accumulates weight * d(log p)/d(params)
    // into grad via backpropagation through time. grad.size() must equal
    // param_count().
    double seq_log_prob_grad(std::span<const TokenId> x, std::span<const TokenId> y, double weight,
                             std::span<double> grad) const;

    // Logits before each position of `tokens` plus one trailing entry:
    // out[j] predicts tokens[j] from the prefix tokens[0..j). Used by batch
    // scoring and the causality checks.
    std::vector<std::vector<double>> stepwise_logits(std::span<const TokenId> tokens) const;

    // Sampling with thinking-mode decoding controls:
    //   full  free sampling until eos
    //   zero  the think-open token is masked everywhere, so no trace appears
    //   less  a fixed short trace is force-fed, then sampling continues
    //   more  the first k sampled think-close tokens are replaced by the
    //         continuation text before sampling resumes
    // Deterministic for a given seed.
    GenerateResult generate(std::span<const TokenId> prompt, ThinkMode mode, int max_new,
                            uint64_t seed, const GenerateOptions& options = {}) const;

    // Activation of one layer at the final position of `tokens`.
    // Zero parameters force the zero vector here: every gate input is zero, so
    // the candidate is tanh(0)=0 and the state update keeps h at zero.
    std::vector<double> hidden_states(std::span<const TokenId> tokens, int layer) const;

    // Named access into the flat parameter vector.
    std::span<double> param(const std::string& name);
    std::span<const double> param(const std::string& name) const;

  private:
    struct LayerView {
        std::span<const double> w_update, u_update, b_update;
        std::span<const double> w_reset, u_reset, b_reset;
        std::span<const double> w_cand, u_cand, b_cand;
    };
    LayerView layer_view(int layer) const;
    std::span<const double> embed_row(TokenId token) const;

    struct StepCache;
    void forward_cached(std::span<const TokenId> tokens, std::vector<StepCache>& caches) const;

    Vocab vocab_;
    ModelDims dims_;
    std::vector<ParamEntry> layout_;
    std::vector<double> params_;
};

}  // namespace rar::lm
