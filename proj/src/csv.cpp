#include "ispls/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace ispls {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string matrix_to_csv(const MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 12);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

double parse_field(const std::string& field, const std::string& name,
                   std::size_t row, std::size_t col) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || begin == end) {
    throw DataError(name + ":" + std::to_string(row) + ":" + std::to_string(col) +
                    ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

MatrixXd parse_matrix_csv(const std::string& text, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0, col = 0;
    while (true) {
      ++col;
      const std::size_t comma = line.find(',', start);
      const std::string field = line.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      row.push_back(parse_field(field, name, lineno, col));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(name + ":" + std::to_string(lineno) + ": ragged row, expected " +
                      std::to_string(width) + " fields, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(name + ": empty matrix");
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

MatrixXd read_matrix_csv(const std::string& path) {
  return parse_matrix_csv(read_text_file(path), path);
}

void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  write_text_file(path, matrix_to_csv(m));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace ispls
