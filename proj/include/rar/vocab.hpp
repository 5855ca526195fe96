#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rar/common.hpp"

namespace rar::lm {

using TokenId = int32_t;

// Character-level vocabulary with five reserved controls. The think
// delimiters have surface forms and are recognized greedily while encoding;
// bos/eos/pad never occur in text and decode to nothing.
class Vocab {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kThinkOpen = 2;
    static constexpr TokenId kThinkClose = 3;
    static constexpr TokenId kPad = 4;
    static constexpr TokenId kReservedCount = 5;

    // Printable ASCII plus newline; the default pipeline vocabulary.
    static Vocab ascii();
    // Reserved tokens plus the given characters (must be unique).
    static Vocab with_chars(const std::string& chars);

    size_t size() const { return symbols_.size(); }
    const std::string& symbol(TokenId id) const { return symbols_.at(size_t(id)); }

    // strict: out-of-vocabulary characters raise EncodeError.
    // otherwise they map to the unknown character (space).
    std::vector<TokenId> encode(const std::string& text, bool strict = true) const;
    std::string decode(const std::vector<TokenId>& ids) const;

    bool operator==(const Vocab& other) const { return symbols_ == other.symbols_; }

  private:
    explicit Vocab(std::vector<std::string> symbols);

    std::vector<std::string> symbols_;
    std::unordered_map<char, TokenId> char_to_id_;
};

}  // namespace rar::lm
