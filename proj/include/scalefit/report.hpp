#pragma once

// Report documents and plot data.
//
// A report is a JSON document plus a plain-text summary. Everything except
// the `generated_at` field is a pure function of the command, its inputs and
// its settings, so two runs can be compared with `body()`.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalefit/lawcore.hpp"
#include "scalefit/powerfit.hpp"
#include "scalefit/serialize.hpp"

namespace scalefit {

inline constexpr std::string_view kToolName = "scalefit";
std::string_view tool_version() noexcept;

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

class Report {
 public:
  explicit Report(std::string command);

  /// Registers an input by name and content; the digest covers every input
  /// in registration order.
  void add_input(std::string name, std::string_view content);

  Json& parameters() { return parameters_; }
  Json& settings() { return settings_; }
  Json& results() { return results_; }
  Json& provenance() { return provenance_; }
  void add_warning(std::string text) { warnings_.push_back(std::move(text)); }
  void add_line(std::string text) { lines_.push_back(std::move(text)); }
  void set_exit_code(int code) { exit_code_ = code; }
  int exit_code() const { return exit_code_; }
  const std::string& command() const { return command_; }

  std::string input_digest() const;

  /// Full document; `generated_at` (ISO-8601 UTC) is appended when given.
  Json document(std::optional<std::string> generated_at = std::nullopt) const;
  /// Serialized document without the timestamp.
  std::string body() const;
  std::string text() const;

 private:
  struct Input {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
  };

  std::string command_;
  std::vector<Input> inputs_;
  Json parameters_ = Json::object();
  Json settings_ = Json::object();
  Json results_ = Json::object();
  Json provenance_ = Json::object();
  std::vector<std::string> warnings_;
  std::vector<std::string> lines_;
  int exit_code_ = 0;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

/// Removes `generated_at` from a serialized document so that two reports
/// can be compared.
std::string strip_timestamp(const Json& document);

// Plot data -----------------------------------------------------------------

/// `count` log-spaced abscissae on [lo, hi] with the law evaluated at each.
std::vector<DataPoint> sample_law(const ScalingLaw& law, double lo, double hi,
                                  std::size_t count = 200);
std::vector<DataPoint> sample_power(const PurePowerLaw& law, double lo, double hi,
                                    std::size_t count = 200);

struct PlotSeries {
  std::string name;
  std::vector<DataPoint> points;
  bool dashed_line = false;  // fitted curves: dashed line, no markers
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Long-format CSV "series,x,y" holding exactly the plotted points.
std::string plot_csv(const Plot& plot);
/// Standalone SVG with log-log axes; non-positive values are skipped.
std::string plot_svg(const Plot& plot);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace scalefit
