#include "scalefit/tables.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "scalefit/error.hpp"

namespace scalefit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(std::string_view source, std::size_t line, const std::string& msg) {
  fail(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

void expect_header(const NumericTable& t, std::span<const std::string_view> columns,
                   std::string_view source) {
  bool ok = t.header.size() == columns.size();
  for (std::size_t i = 0; ok && i < columns.size(); ++i) ok = lower(t.header[i]) == columns[i];
  if (!ok) {
    std::string want;
    for (const auto c : columns) want += (want.empty() ? "" : ",") + std::string(c);
    parse_error(source, 1, "expected header '" + want + "'");
  }
}

}  // namespace

NumericTable read_numeric_table(std::istream& in, std::string_view source) {
  NumericTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      parse_error(source, line_no,
                  "expected " + std::to_string(table.header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v))
        parse_error(source, line_no, "not a finite number: '" + cell + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) fail(ErrorKind::Parse, std::string(source) + ": empty table");
  return table;
}

std::vector<DataPoint> read_xy_table(std::istream& in, std::span<const std::string_view> columns,
                                     std::string_view source) {
  if (columns.size() != 2) fail(ErrorKind::Domain, "read_xy_table: two column names required");
  const auto t = read_numeric_table(in, source);
  expect_header(t, columns, source);
  std::vector<DataPoint> points;
  points.reserve(t.rows.size());
  for (const auto& r : t.rows) points.push_back({r[0], r[1]});
  return points;
}

LossMatrix read_loss_matrix(std::istream& in, std::string_view source) {
  const auto t = read_numeric_table(in, source);
  if (t.header.size() < 2 || lower(t.header[0]) != "n_params")
    parse_error(source, 1, "expected header 'n_params,example_0,...'");
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    if (lower(t.header[j]) != "example_" + std::to_string(j - 1))
      parse_error(source, 1, "column " + std::to_string(j + 1) + " should be 'example_" +
                                 std::to_string(j - 1) + "'");
  }
  LossMatrix m;
  for (const auto& r : t.rows) {
    m.n_params.push_back(r[0]);
    m.losses.emplace_back(r.begin() + 1, r.end());
  }
  return m;
}

std::vector<PairedLossRow> read_paired_losses(std::istream& in, std::string_view source) {
  static constexpr std::array<std::string_view, 4> kColumns{
      "n_params", "loss_unconditioned", "loss_conditioned", "loss_text"};
  const auto t = read_numeric_table(in, source);
  expect_header(t, kColumns, source);
  std::vector<PairedLossRow> rows;
  for (const auto& r : t.rows) rows.push_back({r[0], r[1], r[2], r[3]});
  return rows;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) fail(ErrorKind::Invariant, "format_number: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, std::span<const std::string> header,
               std::span<const std::vector<double>> rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

}  // namespace scalefit
