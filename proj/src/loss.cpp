#include "rar/loss.hpp"

#include <cmath>

namespace rar::train {

double neg_log_sigmoid(double margin) {
    // softplus(-m) = log(1 + exp(-m)); branch keeps the exp argument negative
    if (margin >= 0) return std::log1p(std::exp(-margin));
    return -margin + std::log1p(std::exp(margin));
}

namespace {

void check_pair(const TokenPair& pair) {
    if (pair.y_plus.empty() || pair.y_minus.empty())
        throw InvalidInput("pair responses must be nonempty");
}

double margin_of(const lm::ToyLM& model, const TokenPair& pair, MarginSpace space) {
    check_pair(pair);
    double lp_plus = model.seq_log_prob(pair.x, pair.y_plus);
    double lp_minus = model.seq_log_prob(pair.x, pair.y_minus);
    if (space == MarginSpace::LogProbMean) {
        lp_plus /= double(pair.y_plus.size());
        lp_minus /= double(pair.y_minus.size());
    }
    return lp_plus - lp_minus;
}

}  // namespace

LossValue sft_loss(const lm::ToyLM& model, const std::vector<ScoredSeq>& batch,
                   Reduction reduction) {
    if (batch.empty()) throw InvalidInput("empty batch");
    LossValue out;
    out.reduction = reduction;
    for (const auto& ex : batch) {
        double nll = -model.seq_log_prob(ex.x, ex.y);
        if (reduction == Reduction::Mean) nll /= double(ex.y.size());
        out.per_example.push_back(nll);
        out.scalar += nll;
    }
    if (reduction == Reduction::Mean) out.scalar /= double(batch.size());
    return out;
}

LossValue rso_loss(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                   MarginSpace margin_space) {
    if (pairs.empty()) throw InvalidInput("empty pair list");
    LossValue out;
    out.reduction = Reduction::Mean;
    for (const auto& pair : pairs) {
        double loss = neg_log_sigmoid(margin_of(model, pair, margin_space));
        out.per_example.push_back(loss);
        out.scalar += loss;
    }
    out.scalar /= double(pairs.size());
    return out;
}

std::vector<double> rso_margins(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                                MarginSpace margin_space) {
    std::vector<double> margins;
    margins.reserve(pairs.size());
    for (const auto& pair : pairs) margins.push_back(margin_of(model, pair, margin_space));
    return margins;
}

LossValue sft_loss_grad(const lm::ToyLM& model, const std::vector<ScoredSeq>& batch,
                        Reduction reduction, std::span<double> grad) {
    if (batch.empty()) throw InvalidInput("empty batch");
    LossValue out;
    out.reduction = reduction;
    const double n = double(batch.size());
    for (const auto& ex : batch) {
        // d(scalar)/d(log p) per example
        double weight = reduction == Reduction::Mean ? -1.0 / (double(ex.y.size()) * n) : -1.0;
        double lp = model.seq_log_prob_grad(ex.x, ex.y, weight, grad);
        double nll = -lp;
        if (reduction == Reduction::Mean) nll /= double(ex.y.size());
        out.per_example.push_back(nll);
        out.scalar += nll;
    }
    if (reduction == Reduction::Mean) out.scalar /= n;
    return out;
}

LossValue rso_loss_grad(const lm::ToyLM& model, const std::vector<TokenPair>& pairs,
                        MarginSpace margin_space, std::span<double> grad) {
    if (pairs.empty()) throw InvalidInput("empty pair list");
    LossValue out;
    out.reduction = Reduction::Mean;
    const double n = double(pairs.size());
    for (const auto& pair : pairs) {
        check_pair(pair);
        double len_plus = double(pair.y_plus.size());
        double len_minus = double(pair.y_minus.size());
        double lp_plus = model.seq_log_prob(pair.x, pair.y_plus);
        double lp_minus = model.seq_log_prob(pair.x, pair.y_minus);
        double margin = margin_space == MarginSpace::LogProbMean
                            ? lp_plus / len_plus - lp_minus / len_minus
                            : lp_plus - lp_minus;
        // d softplus(-m)/dm = -sigmoid(-m)
        double dm = -1.0 / (1.0 + std::exp(margin));
        double w_plus = dm / n;
        double w_minus = -dm / n;
        if (margin_space == MarginSpace::LogProbMean) {
            w_plus /= len_plus;
            w_minus /= len_minus;
        }
        model.seq_log_prob_grad(pair.x, pair.y_plus, w_plus, grad);
        model.seq_log_prob_grad(pair.x, pair.y_minus, w_minus, grad);
        double loss = neg_log_sigmoid(margin);
        out.per_example.push_back(loss);
        out.scalar += loss;
    }
    out.scalar /= n;
    return out;
}

}  // namespace rar::train
