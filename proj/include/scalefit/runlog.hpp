#pragma once

// Newline-delimited run logs, one run per line:
//
//   {"run_id":"s1","n_params":1000000,"batch_tokens":512,
//    "series":[[step, tokens, test_loss], [step, tokens, test_loss, train_loss], ...]}
//
// `batch_tokens` and the fourth series column are optional. Blank lines are
// ignored.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalefit/lawcore.hpp"

namespace scalefit {

/// Parses and validates a run log. Throws Error(Parse) listing every
/// malformed line (as "<source>:<line>: message"), then Error(Invariant)
/// naming every run that violates a RunRecord invariant.
std::vector<RunRecord> read_run_log(std::istream& in, std::string_view source = "<input>");
std::vector<RunRecord> read_run_log_file(const std::string& path);

/// Canonical single-line encoding (field order run_id, n_params,
/// batch_tokens, series; integral token counts written as integers).
std::string to_json_line(const RunRecord& run);
void write_run_log(std::ostream& out, std::span<const RunRecord> runs);

}  // namespace scalefit
