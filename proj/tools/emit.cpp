#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "scalefit/config.hpp"
#include "scalefit/error.hpp"

namespace scalefit::cli {

FitOptions resolve_fit_options(const Common& common) {
  FitOptions opts;
  if (!common.config.empty()) {
    std::ifstream in(common.config);
    if (!in) fail(ErrorKind::Parse, common.config + ": cannot open config file");
    opts = read_fit_config(in, opts, common.config);
  }
  if (const auto s = seed_from_env()) opts.seed = *s;
  if (common.seed) opts.seed = *common.seed;
  if (common.threads) opts.threads = *common.threads;
  if (common.bootstrap) opts.bootstrap_replicates = *common.bootstrap;
  try {
    opts.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string("fit options: ") + e.what());
  }
  return opts;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, path + ": cannot open file");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int emit(const Output& out, const Common& common) {
  namespace fs = std::filesystem;
  const Report& report = out.report;
  const fs::path dir(common.out_dir);
  const std::string stem = report.command();

  const Json doc = report.document(common.no_timestamp ? std::nullopt
                                                       : std::optional<std::string>(utc_timestamp()));
  write_text_file(dir / (stem + ".json"), doc.dump(2) + "\n");
  write_text_file(dir / (stem + ".txt"), report.text());
  for (const auto& [name, plot] : out.plots) {
    write_text_file(dir / (stem + "-" + name + ".csv"), plot_csv(plot));
    if (common.svg) write_text_file(dir / (stem + "-" + name + ".svg"), plot_svg(plot));
  }
  for (const auto& [name, content] : out.files) write_text_file(dir / name, content);

  std::ostream& os = out.summary_to_stderr ? std::cerr : std::cout;
  if (common.json) {
    os << doc.dump(2) << "\n";
  } else if (!common.quiet) {
    os << report.text();
  }
  return report.exit_code();
}

}  // namespace scalefit::cli
