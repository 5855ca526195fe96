#include "rar/lm.hpp"

#include <cmath>
#include <numeric>

#include "rar/kernels.hpp"

namespace rar::lm {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sum_exp(std::span<const double> v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double total = 0.0;
    for (double x : v) total += std::exp(x - m);
    return m + std::log(total);
}

}  // namespace

ToyLM::ToyLM(Vocab vocab, ModelDims dims) : vocab_(std::move(vocab)), dims_(dims) {
    if (dims_.n_layers <= 0 || dims_.d_model <= 0 || dims_.max_seq_len <= 0)
        throw InvalidInput("model dimensions must be positive");
    const size_t v = vocab_.size();
    const size_t d = size_t(dims_.d_model);

    size_t offset = 0;
    auto add = [&](const std::string& name, size_t size) {
        layout_.push_back({name, offset, size});
        offset += size;
    };
    add("embed", v * d);
    for (int l = 0; l < dims_.n_layers; ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        add(p + "w_update", d * d);
        add(p + "u_update", d * d);
        add(p + "b_update", d);
        add(p + "w_reset", d * d);
        add(p + "u_reset", d * d);
        add(p + "b_reset", d);
        add(p + "w_cand", d * d);
        add(p + "u_cand", d * d);
        add(p + "b_cand", d);
    }
    add("head.w", v * d);
    add("head.b", v);
    params_.assign(offset, 0.0);
}

ToyLM ToyLM::randomized(Vocab vocab, ModelDims dims, uint64_t seed, double init_std) {
    ToyLM model(std::move(vocab), dims);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, init_std);
    for (double& p : model.params_) p = dist(rng);
    return model;
}

std::span<double> ToyLM::param(const std::string& name) {
    for (const auto& e : layout_) {
        if (e.name == name) return std::span<double>(params_).subspan(e.offset, e.size);
    }
    throw InvalidInput("unknown parameter: " + name);
}

std::span<const double> ToyLM::param(const std::string& name) const {
    for (const auto& e : layout_) {
        if (e.name == name) return std::span<const double>(params_).subspan(e.offset, e.size);
    }
    throw InvalidInput("unknown parameter: " + name);
}

ToyLM::LayerView ToyLM::layer_view(int layer) const {
    std::string p = "layer" + std::to_string(layer) + ".";
    return {param(p + "w_update"), param(p + "u_update"), param(p + "b_update"),
            param(p + "w_reset"),  param(p + "u_reset"),  param(p + "b_reset"),
            param(p + "w_cand"),   param(p + "u_cand"),   param(p + "b_cand")};
}

std::span<const double> ToyLM::embed_row(TokenId token) const {
    if (token < 0 || size_t(token) >= vocab_.size())
        throw InvalidInput("token id out of range: " + std::to_string(token));
    const size_t d = size_t(dims_.d_model);
    return param("embed").subspan(size_t(token) * d, d);
}

ToyLM::State ToyLM::initial_state() const {
    State s;
    s.h.assign(size_t(dims_.n_layers), std::vector<double>(size_t(dims_.d_model), 0.0));
    return s;
}

struct ToyLM::StepCache {
    TokenId token = 0;
    // per layer: previous hidden and the gate activations of this step
    std::vector<std::vector<double>> h_prev, z, r, c, h_new;
};

namespace {

// One GRU cell forward. All vectors have length d.
void cell_forward(std::span<const double> wu, std::span<const double> uu,
                  std::span<const double> bu, std::span<const double> wr,
                  std::span<const double> ur, std::span<const double> br,
                  std::span<const double> wc, std::span<const double> uc,
                  std::span<const double> bc, std::span<const double> u,
                  std::span<const double> h_prev, std::vector<double>& z, std::vector<double>& r,
                  std::vector<double>& c, std::vector<double>& h_new, size_t d) {
    std::vector<double> a(d), b(d);

    z.assign(d, 0.0);
    kernels::matvec(wu, u, bu, a, d, d);
    kernels::matvec(uu, h_prev, {}, b, d, d);
    for (size_t i = 0; i < d; ++i) z[i] = sigmoid(a[i] + b[i]);

    r.assign(d, 0.0);
    kernels::matvec(wr, u, br, a, d, d);
    kernels::matvec(ur, h_prev, {}, b, d, d);
    for (size_t i = 0; i < d; ++i) r[i] = sigmoid(a[i] + b[i]);

    std::vector<double> rh(d);
    for (size_t i = 0; i < d; ++i) rh[i] = r[i] * h_prev[i];

    c.assign(d, 0.0);
    kernels::matvec(wc, u, bc, a, d, d);
    kernels::matvec(uc, rh, {}, b, d, d);
    for (size_t i = 0; i < d; ++i) c[i] = std::tanh(a[i] + b[i]);

    h_new.assign(d, 0.0);
    for (size_t i = 0; i < d; ++i) h_new[i] = h_prev[i] + z[i] * (c[i] - h_prev[i]);
}

}  // namespace

void ToyLM::step(State& state, TokenId token) const {
    const size_t d = size_t(dims_.d_model);
    std::span<const double> u = embed_row(token);
    std::vector<double> z, r, c, h_new, carry;
    for (int l = 0; l < dims_.n_layers; ++l) {
        LayerView lv = layer_view(l);
        cell_forward(lv.w_update, lv.u_update, lv.b_update, lv.w_reset, lv.u_reset,
                     lv.b_reset, lv.w_cand, lv.u_cand, lv.b_cand, u, state.h[size_t(l)], z, r, c,
                     h_new, d);
        state.h[size_t(l)] = h_new;
        carry = h_new;
        u = carry;
    }
}

std::vector<double> ToyLM::next_logits(const State& state) const {
    const size_t v = vocab_.size();
    const size_t d = size_t(dims_.d_model);
    std::vector<double> logits(v);
    kernels::matvec(param("head.w"), state.h[size_t(dims_.n_layers - 1)], param("head.b"), logits,
                    v, d);
    return logits;
}

void ToyLM::forward_cached(std::span<const TokenId> tokens, std::vector<StepCache>& caches) const {
    const size_t d = size_t(dims_.d_model);
    State state = initial_state();
    caches.clear();
    caches.resize(tokens.size());
    std::vector<double> u_buf;
    for (size_t t = 0; t < tokens.size(); ++t) {
        StepCache& cache = caches[t];
        cache.token = tokens[t];
        cache.h_prev.resize(size_t(dims_.n_layers));
        cache.z.resize(size_t(dims_.n_layers));
        cache.r.resize(size_t(dims_.n_layers));
        cache.c.resize(size_t(dims_.n_layers));
        cache.h_new.resize(size_t(dims_.n_layers));
        std::span<const double> u = embed_row(tokens[t]);
        for (int l = 0; l < dims_.n_layers; ++l) {
            LayerView lv = layer_view(l);
            cache.h_prev[size_t(l)] = state.h[size_t(l)];
            cell_forward(lv.w_update, lv.u_update, lv.b_update, lv.w_reset, lv.u_reset,
                         lv.b_reset, lv.w_cand, lv.u_cand, lv.b_cand, u, cache.h_prev[size_t(l)],
                         cache.z[size_t(l)], cache.r[size_t(l)], cache.c[size_t(l)],
                         cache.h_new[size_t(l)], d);
            state.h[size_t(l)] = cache.h_new[size_t(l)];
            u = cache.h_new[size_t(l)];
        }
    }
}

std::vector<std::vector<double>> ToyLM::stepwise_logits(std::span<const TokenId> tokens) const {
    if (tokens.size() > size_t(dims_.max_seq_len))
        throw LengthError("sequence exceeds max_seq_len");
    std::vector<std::vector<double>> out;
    out.reserve(tokens.size() + 1);
    State state = initial_state();
    out.push_back(next_logits(state));
    for (TokenId t : tokens) {
        step(state, t);
        out.push_back(next_logits(state));
    }
    return out;
}

double ToyLM::seq_log_prob(std::span<const TokenId> x, std::span<const TokenId> y) const {
    if (y.empty()) throw InvalidInput("y must be nonempty");
    if (x.size() + y.size() > size_t(dims_.max_seq_len))
        throw LengthError("|x|+|y| exceeds max_seq_len");

    State state = initial_state();
    for (TokenId t : x) step(state, t);
    double total = 0.0;
    for (TokenId target : y) {
        std::vector<double> logits = next_logits(state);
        total += logits[size_t(target)] - log_sum_exp(logits);
        step(state, target);
    }
    return total;
}

double ToyLM::seq_log_prob_grad(std::span<const TokenId> x, std::span<const TokenId> y,
                                double weight, std::span<double> grad) const {
    if (y.empty()) throw InvalidInput("y must be nonempty");
    if (x.size() + y.size() > size_t(dims_.max_seq_len))
        throw LengthError("|x|+|y| exceeds max_seq_len");
    if (grad.size() != params_.size()) throw InvalidInput("gradient buffer size mismatch");

    const size_t d = size_t(dims_.d_model);
    const size_t v = vocab_.size();
    const size_t n = x.size() + y.size();
    const size_t x_len = x.size();

    std::vector<TokenId> tokens(x.begin(), x.end());
    tokens.insert(tokens.end(), y.begin(), y.end());

    std::vector<StepCache> caches;
    forward_cached(tokens, caches);

    std::span<const double> head_w = param("head.w");
    std::span<const double> head_b = param("head.b");
    std::vector<double> zeros(d, 0.0);
    // hidden state of the top layer before consuming tokens[p]
    auto h_top_before = [&](size_t p) -> std::span<const double> {
        if (p == 0) return zeros;
        return caches[p - 1].h_new[size_t(dims_.n_layers - 1)];
    };

    // Forward scoring pass: per scored position, keep weight * (onehot - p).
    double total = 0.0;
    std::vector<std::vector<double>> dlogits(n);
    for (size_t p = x_len; p < n; ++p) {
        std::span<const double> h = h_top_before(p);
        std::vector<double> logits(v);
        kernels::matvec(head_w, h, head_b, logits, v, d);
        double lse = log_sum_exp(logits);
        total += logits[size_t(tokens[p])] - lse;
        std::vector<double>& dl = dlogits[p];
        dl.resize(v);
        for (size_t i = 0; i < v; ++i) dl[i] = -weight * std::exp(logits[i] - lse);
        dl[size_t(tokens[p])] += weight;
    }

    // Backward through time. dh[l] carries the gradient w.r.t. layer l's
    // hidden state after the step currently being processed.
    auto grad_of = [&](const std::string& name) -> std::span<double> {
        for (const auto& e : layout_) {
            if (e.name == name) return grad.subspan(e.offset, e.size);
        }
        throw InvalidInput("unknown parameter: " + name);
    };
    std::span<double> g_head_w = grad_of("head.w");
    std::span<double> g_head_b = grad_of("head.b");
    std::span<double> g_embed = grad_of("embed");

    std::vector<std::vector<double>> dh(size_t(dims_.n_layers), std::vector<double>(d, 0.0));
    std::vector<double> dz(d), dc(d), da(d), drh(d), dr(d), dh_prev(d);

    for (size_t p = n; p-- > 0;) {
        const StepCache& cache = caches[p];

        // Scoring event at position p reads the state before step p, i.e.
        // h_new of step p-1; its state gradient is stashed and added after
        // this step's backward, when dh refers to exactly that state.
        std::vector<double> event_carry;
        if (!dlogits[p].empty()) {
            kernels::accum_outer(g_head_w, dlogits[p], h_top_before(p), v, d);
            for (size_t i = 0; i < v; ++i) g_head_b[i] += dlogits[p][i];
            if (p > 0) {
                event_carry.assign(d, 0.0);
                kernels::matvec_transposed_accum(head_w, dlogits[p], event_carry, v, d);
            }
        }

        for (int l = dims_.n_layers - 1; l >= 0; --l) {
            const auto& h_prev = cache.h_prev[size_t(l)];
            const auto& z = cache.z[size_t(l)];
            const auto& r = cache.r[size_t(l)];
            const auto& c = cache.c[size_t(l)];
            std::vector<double>& dh_l = dh[size_t(l)];
            // dh_l currently holds d/d h_new[l] at this step (recurrent carry
            // plus, for non-top layers, the input gradient from the layer
            // above accumulated below as du).

            std::string prefix = "layer" + std::to_string(l) + ".";
            LayerView lv = layer_view(l);
            std::span<const double> u =
                l == 0 ? embed_row(cache.token) : std::span<const double>(cache.h_new[size_t(l - 1)]);

            for (size_t i = 0; i < d; ++i) {
                dz[i] = dh_l[i] * (c[i] - h_prev[i]);
                dc[i] = dh_l[i] * z[i];
                dh_prev[i] = dh_l[i] * (1.0 - z[i]);
            }

            std::fill(drh.begin(), drh.end(), 0.0);
            std::vector<double> rh(d), next_du(d, 0.0);
            for (size_t i = 0; i < d; ++i) rh[i] = r[i] * h_prev[i];

            // candidate path
            for (size_t i = 0; i < d; ++i) da[i] = dc[i] * (1.0 - c[i] * c[i]);
            kernels::accum_outer(grad_of(prefix + "w_cand"), da, u, d, d);
            kernels::accum_outer(grad_of(prefix + "u_cand"), da, rh, d, d);
            {
                std::span<double> gb = grad_of(prefix + "b_cand");
                for (size_t i = 0; i < d; ++i) gb[i] += da[i];
            }
            kernels::matvec_transposed_accum(lv.w_cand, da, next_du, d, d);
            kernels::matvec_transposed_accum(lv.u_cand, da, drh, d, d);
            for (size_t i = 0; i < d; ++i) {
                dr[i] = drh[i] * h_prev[i];
                dh_prev[i] += drh[i] * r[i];
            }

            // update gate path
            for (size_t i = 0; i < d; ++i) da[i] = dz[i] * z[i] * (1.0 - z[i]);
            kernels::accum_outer(grad_of(prefix + "w_update"), da, u, d, d);
            kernels::accum_outer(grad_of(prefix + "u_update"), da, h_prev, d, d);
            {
                std::span<double> gb = grad_of(prefix + "b_update");
                for (size_t i = 0; i < d; ++i) gb[i] += da[i];
            }
            kernels::matvec_transposed_accum(lv.w_update, da, next_du, d, d);
            kernels::matvec_transposed_accum(lv.u_update, da, dh_prev, d, d);

            // reset gate path
            for (size_t i = 0; i < d; ++i) da[i] = dr[i] * r[i] * (1.0 - r[i]);
            kernels::accum_outer(grad_of(prefix + "w_reset"), da, u, d, d);
            kernels::accum_outer(grad_of(prefix + "u_reset"), da, h_prev, d, d);
            {
                std::span<double> gb = grad_of(prefix + "b_reset");
                for (size_t i = 0; i < d; ++i) gb[i] += da[i];
            }
            kernels::matvec_transposed_accum(lv.w_reset, da, next_du, d, d);
            kernels::matvec_transposed_accum(lv.u_reset, da, dh_prev, d, d);

            // dh_prev becomes the recurrent carry for step p-1 at this layer;
            // next_du flows to the layer below (or the embedding).
            dh_l = dh_prev;
            if (l == 0) {
                std::span<double> ge = g_embed.subspan(size_t(cache.token) * d, d);
                for (size_t i = 0; i < d; ++i) ge[i] += next_du[i];
            } else {
                // add to the layer below's h_new gradient at this same step
                for (size_t i = 0; i < d; ++i) dh[size_t(l - 1)][i] += next_du[i];
            }
        }

        if (!event_carry.empty()) {
            std::vector<double>& dh_top = dh[size_t(dims_.n_layers - 1)];
            for (size_t i = 0; i < d; ++i) dh_top[i] += event_carry[i];
        }
    }

    return total;
}

GenerateResult ToyLM::generate(std::span<const TokenId> prompt, ThinkMode mode, int max_new,
                               uint64_t seed, const GenerateOptions& options) const {
    if (max_new <= 0) throw InvalidInput("max_new must be positive");

    GenerateResult result;
    State state = initial_state();
    for (TokenId t : prompt) step(state, t);

    std::mt19937_64 rng(seed);
    auto sample_from = [&](std::vector<double>& logits) -> TokenId {
        if (options.temperature > 0) {
            for (double& v : logits) v /= options.temperature;
        }
        kernels::softmax_inplace(logits);
        if (options.temperature == 0) {
            // greedy: most probable, lowest id wins ties
            size_t best = 0;
            for (size_t i = 1; i < logits.size(); ++i)
                if (logits[i] > logits[best]) best = i;
            return TokenId(best);
        }
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(rng);
        double acc = 0.0;
        for (size_t i = 0; i < logits.size(); ++i) {
            acc += logits[i];
            if (u <= acc) return TokenId(i);
        }
        return TokenId(logits.size() - 1);
    };

    // less: force-feed the fixed short trace before sampling anything
    if (mode == ThinkMode::Less) {
        for (TokenId t : vocab_.encode(options.less_trace_text)) {
            result.tokens.push_back(t);
            step(state, t);
        }
    }

    std::vector<TokenId> continuation =
        mode == ThinkMode::More ? vocab_.encode(options.continuation_text) : std::vector<TokenId>{};

    bool saw_eos = false;
    while (int(result.tokens.size()) < max_new) {
        std::vector<double> logits = next_logits(state);
        if (mode == ThinkMode::Zero) logits[Vocab::kThinkOpen] = -1e300;
        TokenId next = sample_from(logits);
        if (next == Vocab::kEos) {
            saw_eos = true;
            break;
        }
        if (mode == ThinkMode::More && next == Vocab::kThinkClose &&
            result.think_substitutions < options.more_substitutions) {
            ++result.think_substitutions;
            for (TokenId t : continuation) {
                if (int(result.tokens.size()) >= max_new) break;
                result.tokens.push_back(t);
                step(state, t);
            }
            continue;
        }
        result.tokens.push_back(next);
        step(state, next);
    }
    result.truncated = !saw_eos;
    return result;
}

std::vector<double> ToyLM::hidden_states(std::span<const TokenId> tokens, int layer) const {
    if (layer < 0 || layer >= dims_.n_layers)
        throw std::out_of_range("layer index out of range: " + std::to_string(layer));
    if (tokens.size() > size_t(dims_.max_seq_len))
        throw LengthError("sequence exceeds max_seq_len");
    State state = initial_state();
    for (TokenId t : tokens) step(state, t);
    return state.h[size_t(layer)];
}

}  // namespace rar::lm
