#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "monmf/dense_matrix.hpp"

namespace monmf {

// Matrix CSV format: one row per line, comma-separated decimal values,
// preceded by an optional "# rows=<n> cols=<m>" line. Values are written
// with %.17g so that write -> read round-trips bit-exactly and repeated
// writes of the same matrix are byte-identical.

inline void write_matrix_csv(std::ostream& os, const DenseMatrix& m) {
  os << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf;
      if (j + 1 < m.cols()) os << ',';
    }
    os << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix_csv(out, m);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline DenseMatrix read_matrix_csv(std::istream& is) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  long long declared_rows = -1, declared_cols = -1;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && !line.empty() && line[0] == '#') {
      std::sscanf(line.c_str(), "# rows=%lld cols=%lld", &declared_rows,
                  &declared_cols);
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    Index row_cols = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string field = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const char* begin = field.c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      while (end && *end == ' ') ++end;
      if (end == begin || (end && *end != '\0'))
        throw std::invalid_argument("csv: malformed numeric field '" + field +
                                    "'");
      values.push_back(v);
      ++row_cols;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols < 0)
      cols = row_cols;
    else if (row_cols != cols)
      throw std::invalid_argument("csv: inconsistent column count");
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("csv: no data rows");
  if (declared_rows >= 0 && (declared_rows != rows || declared_cols != cols))
    throw std::invalid_argument("csv: header does not match data shape");
  return DenseMatrix(rows, cols, std::move(values));
}

inline DenseMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open for reading: " + path);
  return read_matrix_csv(in);
}

}  // namespace monmf
