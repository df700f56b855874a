#include "scalefit/config.hpp"

#include <charconv>
#include <cstdlib>
#include <istream>
#include <string>

#include "scalefit/error.hpp"

namespace scalefit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
bool parse_value(const std::string& text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

FitOptions read_fit_config(std::istream& in, FitOptions base, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto bad = [&]() { fail(ErrorKind::Parse, where + "bad value for '" + key + "': '" + value + "'"); };

    bool ok = true;
    if (key == "max_iterations") ok = parse_value(value, base.max_iterations);
    else if (key == "tolerance") ok = parse_value(value, base.tolerance);
    else if (key == "irreducible_grid_points") ok = parse_value(value, base.irreducible_grid_points);
    else if (key == "irreducible_headroom") ok = parse_value(value, base.irreducible_headroom);
    else if (key == "bootstrap_replicates") ok = parse_value(value, base.bootstrap_replicates);
    else if (key == "seed") ok = parse_value(value, base.seed);
    else if (key == "asymmetry") ok = parse_value(value, base.asymmetry);
    else if (key == "ci_low_percentile") ok = parse_value(value, base.ci_low_percentile);
    else if (key == "ci_high_percentile") ok = parse_value(value, base.ci_high_percentile);
    else if (key == "threads") ok = parse_value(value, base.threads);
    else if (key == "exponent_grid") {
      base.exponent_grid.clear();
      std::size_t start = 0;
      while (ok) {
        const auto comma = value.find(',', start);
        double a = 0.0;
        ok = parse_value(trim(std::string_view(value).substr(start, comma - start)), a);
        base.exponent_grid.push_back(a);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      fail(ErrorKind::Parse, where + "unknown key '" + key + "'");
    }
    if (!ok) bad();
  }
  try {
    base.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string(source) + ": " + e.what());
  }
  return base;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv(kSeedEnvVar);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  if (!parse_value(trim(raw), seed))
    fail(ErrorKind::Parse, std::string(kSeedEnvVar) + ": not an unsigned integer: '" + raw + "'");
  return seed;
}

}  // namespace scalefit
