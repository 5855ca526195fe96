#pragma once

#include <span>
#include <vector>

#include "rar/lm.hpp"

namespace rar::train {

enum class Reduction { Sum, Mean };
enum class MarginSpace { LogProb, LogProbMean };
enum class RsoSpan { Full, TraceOnly };

struct LossValue {
    double scalar = 0.0;
    std::vector<double> per_example;
    Reduction reduction = Reduction::Mean;
};

// One teacher-forced example: tokens of the prompt and of the target.
struct ScoredSeq {
    std::vector<lm::TokenId> x;
    std::vector<lm::TokenId> y;
};

// One tokenized preference pair; chosen and rejected share the prompt.
struct TokenPair {
    std::vector<lm::TokenId> x;
    std::vector<lm::TokenId> y_plus;
    std::vector<lm::TokenId> y_minus;
};

// Negative log likelihood (the distillation objective).
//   Sum:  per_example[i] = -log p(y_i|x_i), scalar = their sum
//   Mean: per_example[i] = -log p(y_i|x_i) / |y_i|, scalar = their mean
LossValue sft_loss(const lm::ToyLM& model, const std::vector<ScoredSeq>& batch,
                   Reduction reduction);

// Sigmoid ranking loss over sequence log probabilities:
//   per_example[i] = -log sigmoid(m_i) = softplus(-m_i)
// with margin m_i = log p(y+|x) - log p(y-|x), optionally per-token
// normalized; scalar is the mean over pairs. Computed via softplus so large
// margins neither overflow nor lose the sign.
LossValue rso_loss(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                   MarginSpace margin_space = MarginSpace::LogProb);

// Margins only (held-out diagnostics).
std::vector<double> rso_margins(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                                MarginSpace margin_space = MarginSpace::LogProb);

// Analytic gradient of the scalar loss over the full parameter layout.
// Returns the loss; grad must be zero-initialized by the caller.
LossValue sft_loss_grad(const lm::ToyLM& model, const std::vector<ScoredSeq>& batch,
                        Reduction reduction, std::span<double> grad);
LossValue rso_loss_grad(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                        MarginSpace margin_space, std::span<double> grad);

// -log sigmoid(m), evaluated stably for any m.
double neg_log_sigmoid(double margin);

}  // namespace rar::train
