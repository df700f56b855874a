#pragma once

// Shared plumbing for the scalefit subcommands: option structs, input
// loading, and report/plot emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scalefit/powerfit.hpp"
#include "scalefit/report.hpp"

namespace scalefit::cli {

enum ExitCode : int { kOk = 0, kAnalysisFailure = 1, kUsage = 2, kInvariant = 3 };

struct Common {
  std::string out_dir = "scalefit-out";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> bootstrap;
  bool svg = false;
  bool json = false;
  bool quiet = false;
  bool no_timestamp = false;
};

/// Defaults, then --config, then SCALEFIT_SEED, then flags.
FitOptions resolve_fit_options(const Common& common);

/// Whole file, or stdin for "-".
std::string read_input(const std::string& path);

struct Output {
  explicit Output(Report r) : report(std::move(r)) {}

  Report report;
  std::vector<std::pair<std::string, Plot>> plots;   // name -> plot
  std::vector<std::pair<std::string, std::string>> files;  // file name -> content
  bool summary_to_stderr = false;
};

/// Writes <out>/<command>.json, <out>/<command>.txt, one CSV (plus SVG with
/// --svg) per plot as <out>/<command>-<name>.csv, and any extra files, then
/// prints the text summary (or the document with --json). Returns the exit
/// code recorded in the report.
int emit(const Output& out, const Common& common);

// Subcommand options ---------------------------------------------------------

struct IngestArgs {
  std::string runs = "-";
};

struct FitArgs {
  std::string runs;
  std::string points;
  std::string variable = "compute";
  std::string split = "test";
  std::string policy = "final";
  int smoothing = 1;
  bool below_frontier = false;
  bool no_bootstrap = false;
};

struct FrontierArgs {
  std::string runs = "-";
  std::string split = "test";
  int smoothing = 1;
};

struct NoptArgs {
  std::string runs;
  std::optional<double> coefficient;
  std::optional<double> exponent;
  std::string split = "test";
  bool keep_edge_models = false;
};

struct LawArgs {
  std::string law_file;
  std::optional<double> irreducible;
  std::optional<double> scale;
  std::optional<double> exponent;
  std::string variable = "compute";
};

struct ForecastArgs {
  LawArgs law;
  std::vector<double> targets;
  std::vector<double> at;
};

struct RescaleArgs {
  std::string preset;
  LawArgs law;
  std::optional<double> tokens_per_example;
};

struct ConsistencyArgs {
  std::string ld;
  std::string lc;
  std::string nopt;
  double perturb = 0.05;
  double bracket_low = 1e-12;
  double bracket_high = 1e12;
  int grid_points = 241;
  double tolerance = 1e-9;
};

struct PercentileArgs {
  std::string matrix;
  std::vector<double> percentiles;
};

struct MIArgs {
  std::string pairs;
  std::vector<std::string> points;  // "N:value"
  std::string trend = "infogain";
  std::optional<double> target;
  std::optional<double> nats_per_word;
};

struct ContextArgs {
  std::string profile;
  std::optional<double> l_model;
  std::optional<double> l_unigram;
  std::optional<double> p;
  std::optional<std::int64_t> horizon;
};

struct ScanArgs {
  std::string scan;
};

struct SynthArgs {
  std::string preset;
  std::string output = "-";
  std::optional<double> l_inf, n_scale, alpha_n, e_scale, alpha_e;
  double noise = 0.0;
};

struct ReportArgs {
  std::string in;
  std::vector<std::string> verify;
};

int run_ingest_check(const IngestArgs& a, const Common& c);
int run_fit(const FitArgs& a, const Common& c);
int run_frontier(const FrontierArgs& a, const Common& c);
int run_nopt(const NoptArgs& a, const Common& c);
int run_forecast(const ForecastArgs& a, const Common& c);
int run_rescale(const RescaleArgs& a, const Common& c);
int run_consistency(const ConsistencyArgs& a, const Common& c);
int run_percentiles(const PercentileArgs& a, const Common& c);
int run_mi(const MIArgs& a, const Common& c);
int run_context(const ContextArgs& a, const Common& c);
int run_scan_opt(const ScanArgs& a, const Common& c);
int run_synth(const SynthArgs& a, const Common& c);
int run_report(const ReportArgs& a, const Common& c);

}  // namespace scalefit::cli
