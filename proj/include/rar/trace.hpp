#pragma once

#include <string>
#include <utility>

#include "rar/common.hpp"

namespace rar::trace {

inline constexpr const char* kThinkOpen = "<think>";
inline constexpr const char* kThinkClose = "</think>";

struct Delimiters {
    std::string open = kThinkOpen;
    std::string close = kThinkClose;
};

// Splits a raw completion into (reasoning, answer).
//   - text strictly inside the first delimiter pair -> reasoning
//   - text after the closing delimiter, leading whitespace trimmed -> answer
//   - no delimiters at all -> ("", raw)  (zero-think shaped output)
// A dangling opener throws TraceParseError in strict mode; lenient mode
// returns (rest, "") instead.
std::pair<std::string, std::string> parse_trace(const std::string& raw, bool strict = true,
                                                const Delimiters& delims = {});

// Inverse of parse_trace for delimiter-free reasoning and answers without
// leading whitespace. Empty reasoning assembles to the bare answer.
std::string assemble(const std::string& reasoning, const std::string& answer,
                     const Delimiters& delims = {});

}  // namespace rar::trace
