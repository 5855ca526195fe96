#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rar {

inline constexpr const char* kToolVersion = "0.1.0";

// Error taxonomy. Every failure mode a caller is expected to handle has its
// own type; anything else is a plain std::runtime_error.
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line_no)
        : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    int line;
};

struct EncodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PairIntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
    TrainingDiverged(const std::string& msg, int64_t at_step)
        : std::runtime_error(msg + " (step " + std::to_string(at_step) + ")"), step(at_step) {}
    int64_t step;
};

struct JudgeParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingleLabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SHA-256 of a byte string, lowercase hex. Used for request digests, template
// verification and artifact manifests; must be stable across platforms.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

}  // namespace rar
