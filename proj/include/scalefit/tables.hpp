#pragma once

// Comma-separated numeric inputs with a header row. Cells are plain numbers;
// quoting is not supported. Errors carry "<source>:<line>" prefixes.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalefit/analysis.hpp"
#include "scalefit/powerfit.hpp"

namespace scalefit {

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Rows must have as many cells as the header; every cell must parse as a
/// finite number.
NumericTable read_numeric_table(std::istream& in, std::string_view source = "<input>");

/// Two-column table whose header must equal `columns` (case-insensitive),
/// e.g. {"aspect_ratio", "loss"}.
std::vector<DataPoint> read_xy_table(std::istream& in, std::span<const std::string_view> columns,
                                     std::string_view source = "<input>");

/// Header `n_params,example_0,example_1,...`.
LossMatrix read_loss_matrix(std::istream& in, std::string_view source = "<input>");

struct PairedLossRow {
  double n_params = 0.0;
  double loss_unconditioned = 0.0;
  double loss_conditioned = 0.0;
  double loss_text = 0.0;
};

/// Header `n_params,loss_unconditioned,loss_conditioned,loss_text`.
std::vector<PairedLossRow> read_paired_losses(std::istream& in, std::string_view source = "<input>");

/// Shortest decimal string that round-trips to the same double.
std::string format_number(double value);

void write_csv(std::ostream& out, std::span<const std::string> header,
               std::span<const std::vector<double>> rows);

}  // namespace scalefit
