#pragma once

#include <string>

#include "ispls/types.hpp"

namespace ispls {

// Shortest text that round-trips a double exactly (printf %.17g).
std::string format_double(double v);

// Headerless numeric CSV; one row per line, comma separated.
std::string matrix_to_csv(const MatrixXd& m);

// Strict parse. `name` labels the source in diagnostics; ragged rows and
// non-numeric fields raise DataError with 1-based row/column positions.
MatrixXd parse_matrix_csv(const std::string& text, const std::string& name);

MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const MatrixXd& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ispls
