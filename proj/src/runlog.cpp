#include "scalefit/runlog.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "scalefit/error.hpp"

namespace scalefit {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

double number(const json& v, const char* what) {
  if (!v.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.007199254740992e15)
      return static_cast<std::int64_t>(d);
  }
  throw std::invalid_argument(std::string(what) + " must be an integer");
}

RunRecord parse_line(const std::string& line) {
  const json j = json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  for (const char* key : {"run_id", "n_params", "series"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");

  RunRecord run;
  if (!j["run_id"].is_string()) throw std::invalid_argument("run_id must be a string");
  run.run_id = j["run_id"].get<std::string>();
  run.n_params = integer(j["n_params"], "n_params");
  if (j.contains("batch_tokens") && !j["batch_tokens"].is_null())
    run.batch_tokens = integer(j["batch_tokens"], "batch_tokens");
  const json& series = j["series"];
  if (!series.is_array()) throw std::invalid_argument("series must be an array");
  for (const auto& row : series) {
    if (!row.is_array() || row.size() < 3 || row.size() > 4)
      throw std::invalid_argument("series rows must be [step, tokens, test_loss, optional train_loss]");
    RunPoint p;
    p.step = integer(row[0], "step");
    p.tokens = number(row[1], "tokens");
    p.test_loss = number(row[2], "test_loss");
    if (row.size() == 4 && !row[3].is_null()) p.train_loss = number(row[3], "train_loss");
    run.series.push_back(p);
  }
  return run;
}

ordered token_value(double tokens) {
  if (std::isfinite(tokens) && tokens == std::floor(tokens) && std::fabs(tokens) < 9.007199254740992e15)
    return static_cast<std::int64_t>(tokens);
  return tokens;
}

}  // namespace

std::vector<RunRecord> read_run_log(std::istream& in, std::string_view source) {
  std::vector<RunRecord> runs;
  std::vector<std::string> parse_errors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      runs.push_back(parse_line(line));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << source << ":" << line_no << ": " << e.what();
      parse_errors.push_back(os.str());
    }
  }
  if (!parse_errors.empty()) {
    std::string msg;
    for (const auto& e : parse_errors) msg += e + "\n";
    fail(ErrorKind::Parse, msg);
  }

  std::string violations;
  for (const auto& run : runs) {
    for (const auto& issue : validate_run(run)) violations += "run '" + run.run_id + "': " + issue + "\n";
  }
  if (!violations.empty()) fail(ErrorKind::Invariant, violations);
  return runs;
}

std::vector<RunRecord> read_run_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, path + ": cannot open file");
  return read_run_log(in, path);
}

std::string to_json_line(const RunRecord& run) {
  ordered j;
  j["run_id"] = run.run_id;
  j["n_params"] = run.n_params;
  if (run.batch_tokens) j["batch_tokens"] = *run.batch_tokens;
  ordered series = ordered::array();
  for (const auto& p : run.series) {
    ordered row = ordered::array({p.step, token_value(p.tokens), p.test_loss});
    if (p.train_loss) row.push_back(*p.train_loss);
    series.push_back(std::move(row));
  }
  j["series"] = std::move(series);
  return j.dump();
}

void write_run_log(std::ostream& out, std::span<const RunRecord> runs) {
  for (const auto& run : runs) out << to_json_line(run) << '\n';
}

}  // namespace scalefit
