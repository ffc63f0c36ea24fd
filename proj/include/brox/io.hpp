#pragma once

// Artifacts: binary fields and matrices with JSON sidecars, schema-tagged CSV tables.
//
// Field file:  "BROXFLD1" | u64 M | u64 K | (K+1) × (re, im) float64, little endian.
// Matrix file: "BROXMAT1" | u64 rows | u64 cols | rows × cols float64, row-major.
// CSV tables start with a "# schema: <name>/<version>" line.

#include <string>
#include <vector>

#include <json.hpp>

#include "brox/spectral.hpp"

namespace brox::io {

using json = nlohmann::json;

void write_field(const std::string& path, const FourierField& f, const json& meta = json::object());
FourierField read_field(const std::string& path);

void write_matrix(const std::string& path, std::size_t rows, std::size_t cols, const std::vector<double>& data,
                  const json& meta = json::object());
std::vector<double> read_matrix(const std::string& path, std::size_t& rows, std::size_t& cols);

struct Table {
  std::string schema;  // e.g. "brox.spectrum/1"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  Table() = default;
  Table(std::string schema_, std::vector<std::string> columns_) : schema(std::move(schema_)), columns(std::move(columns_)) {}
  /// Appends a row; every cell is a number (shortest round-trip form) or a string.
  template <class... Ts>
  void add(const Ts&... cells) {
    rows.push_back({cell(cells)...});
  }
  std::size_t column(const std::string& name) const;

  static std::string cell(double x);
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(unsigned long x) { return std::to_string(x); }
  static std::string cell(unsigned long long x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
};

void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

}  // namespace brox::io
