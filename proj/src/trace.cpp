#include "rar/trace.hpp"

namespace rar::trace {

namespace {

std::string trim_leading(std::string_view s) {
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    return std::string(s.substr(b));
}

}  // namespace

std::pair<std::string, std::string> parse_trace(const std::string& raw, bool strict,
                                                const Delimiters& delims) {
    if (raw.empty()) throw TraceParseError("empty completion");

    size_t open = raw.find(delims.open);
    if (open == std::string::npos) return {"", raw};

    size_t body_start = open + delims.open.size();
    size_t close = raw.find(delims.close, body_start);
    if (close == std::string::npos) {
        if (strict) throw TraceParseError("opening delimiter without closing delimiter");
        return {raw.substr(body_start), ""};
    }
    std::string reasoning = raw.substr(body_start, close - body_start);
    std::string answer = trim_leading(std::string_view(raw).substr(close + delims.close.size()));
    return {reasoning, answer};
}

std::string assemble(const std::string& reasoning, const std::string& answer,
                     const Delimiters& delims) {
    if (reasoning.empty()) return answer;
    return delims.open + reasoning + delims.close + "\n" + answer;
}

}  // namespace rar::trace
