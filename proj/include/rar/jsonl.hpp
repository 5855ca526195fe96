#pragma once

#include <string>
#include <vector>

#include "rar/types.hpp"

namespace rar::gen {

// A persisted dataset record: the sample plus generation provenance.
struct GenRecord {
    Sample sample;
    std::string backend_id;
    std::string request_digest;
    std::string created_at;
};

// Fixed-key-order JSON codecs. Record keys are emitted in this order:
//   id, role_id, scenario, style, system_prompt, context, query, reasoning,
//   answer, backend_id, request_digest, created_at
// and pairs as: id, prompt{role_id, scenario, instruction}, chosen, rejected.
// write(read(x)) is byte identity and read(write(x)) is value identity; both
// are load-bearing for the deterministic-artifact guarantees.
std::string to_json_line(const GenRecord& r);
std::string to_json_line(const PreferencePair& p);
GenRecord gen_record_from_json(const std::string& line);
PreferencePair pair_from_json(const std::string& line);

// One record per line, UTF-8, LF endings, trailing newline after the last
// record. Returns the number of records written.
size_t write_jsonl_records(const std::vector<GenRecord>& records, const std::string& path);
size_t write_jsonl_pairs(const std::vector<PreferencePair>& pairs, const std::string& path);

// Throws ParseError carrying the 1-based line number of the first bad line.
std::vector<GenRecord> read_jsonl_records(const std::string& path);
std::vector<PreferencePair> read_jsonl_pairs(const std::string& path);

}  // namespace rar::gen
