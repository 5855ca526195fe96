#include "rar/vocab.hpp"

#include <set>

#include "rar/trace.hpp"

namespace rar::lm {

Vocab::Vocab(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() < 8) throw InvalidInput("vocab needs at least 8 symbols");
    std::set<std::string> seen;
    for (const auto& s : symbols_) {
        if (!seen.insert(s).second) throw InvalidInput("duplicate vocab symbol: " + s);
    }
    for (size_t i = kReservedCount; i < symbols_.size(); ++i) {
        if (symbols_[i].size() != 1)
            throw InvalidInput("non-reserved symbols must be single characters");
        char_to_id_[symbols_[i][0]] = TokenId(i);
    }
}

Vocab Vocab::ascii() {
    std::string chars = "\n";
    for (char c = ' '; c <= '~'; ++c) chars.push_back(c);
    return with_chars(chars);
}

Vocab Vocab::with_chars(const std::string& chars) {
    std::vector<std::string> symbols = {"<bos>", "<eos>", trace::kThinkOpen, trace::kThinkClose,
                                        "<pad>"};
    for (char c : chars) symbols.push_back(std::string(1, c));
    return Vocab(std::move(symbols));
}

std::vector<TokenId> Vocab::encode(const std::string& text, bool strict) const {
    std::vector<TokenId> ids;
    ids.reserve(text.size());
    const std::string& open = symbols_[kThinkOpen];
    const std::string& close = symbols_[kThinkClose];
    size_t pos = 0;
    while (pos < text.size()) {
        if (text.compare(pos, open.size(), open) == 0) {
            ids.push_back(kThinkOpen);
            pos += open.size();
            continue;
        }
        if (text.compare(pos, close.size(), close) == 0) {
            ids.push_back(kThinkClose);
            pos += close.size();
            continue;
        }
        auto it = char_to_id_.find(text[pos]);
        if (it == char_to_id_.end()) {
            if (strict)
                throw EncodeError(std::string("character not in vocabulary: '") + text[pos] + "'");
            it = char_to_id_.find(' ');
            if (it == char_to_id_.end()) throw EncodeError("vocabulary has no unknown fallback");
        }
        ids.push_back(it->second);
        ++pos;
    }
    return ids;
}

std::string Vocab::decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (TokenId id : ids) {
        if (id < 0 || size_t(id) >= symbols_.size())
            throw EncodeError("token id out of range: " + std::to_string(id));
        if (id == kBos || id == kEos || id == kPad) continue;
        out += symbols_[size_t(id)];
    }
    return out;
}

}  // namespace rar::lm
