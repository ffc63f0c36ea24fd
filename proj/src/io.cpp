#include "brox/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "brox/config.hpp"
#include "brox/errors.hpp"

namespace brox::io {

namespace {

constexpr char field_magic[8] = {'B', 'R', 'O', 'X', 'F', 'L', 'D', '1'};
constexpr char matrix_magic[8] = {'B', 'R', 'O', 'X', 'M', 'A', 'T', '1'};

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot read " + path);
  return in;
}

void put_u64(std::ofstream& o, std::uint64_t v) { o.write(reinterpret_cast<const char*>(&v), sizeof v); }
std::uint64_t get_u64(std::ifstream& i) {
  std::uint64_t v = 0;
  i.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void check_magic(std::ifstream& in, const char (&magic)[8], const std::string& path) {
  char m[8];
  in.read(m, 8);
  if (!in || std::memcmp(m, magic, 8) != 0) throw Error(path + ": bad magic");
}

}  // namespace

void write_field(const std::string& path, const FourierField& f, const json& meta) {
  auto out = open_out(path, true);
  out.write(field_magic, 8);
  put_u64(out, f.grid().points());
  put_u64(out, static_cast<std::uint64_t>(f.max_mode()));
  for (const cplx& c : f.coeffs()) {
    const double re = c.real(), im = c.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  json side = {{"schema", "brox.field/1"}, {"M", f.grid().points()}, {"K", f.max_mode()}, {"meta", meta}};
  write_json(path + ".json", side);
}

FourierField read_field(const std::string& path) {
  auto in = open_in(path, true);
  check_magic(in, field_magic, path);
  const auto M = get_u64(in);
  const auto K = get_u64(in);
  std::vector<cplx> c(K + 1);
  for (auto& z : c) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    z = {re, im};
  }
  if (!in) throw Error(path + ": truncated field file");
  return FourierField(PeriodicGrid(M, static_cast<int>(K)), std::move(c));
}

void write_matrix(const std::string& path, std::size_t rows, std::size_t cols, const std::vector<double>& data,
                  const json& meta) {
  if (data.size() != rows * cols) throw ParameterError("matrix data size does not match its shape");
  auto out = open_out(path, true);
  out.write(matrix_magic, 8);
  put_u64(out, rows);
  put_u64(out, cols);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  json side = {{"schema", "brox.matrix/1"}, {"rows", rows}, {"cols", cols}, {"meta", meta}};
  write_json(path + ".json", side);
}

std::vector<double> read_matrix(const std::string& path, std::size_t& rows, std::size_t& cols) {
  auto in = open_in(path, true);
  check_magic(in, matrix_magic, path);
  rows = get_u64(in);
  cols = get_u64(in);
  std::vector<double> d(rows * cols);
  in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
  if (!in) throw Error(path + ": truncated matrix file");
  return d;
}

std::string Table::cell(double x) { return format_double(x); }

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error("table " + schema + " has no column " + name);
}

void write_csv(const std::string& path, const Table& t) {
  auto out = open_out(path, false);
  out << "# schema: " << t.schema << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw Error("row width does not match the header of " + t.schema);
    line(r);
  }
}

Table read_csv(const std::string& path) {
  auto in = open_in(path, false);
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# schema: ", 0) == 0) {
      t.schema = line.substr(10);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) t.columns = split(line);
    else t.rows.push_back(split(line));
  }
  if (t.schema.empty()) throw Error(path + ": missing schema line");
  return t;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path, false);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  auto in = open_in(path, false);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace brox::io
