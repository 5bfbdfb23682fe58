#pragma once

#include "cssnmf/matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cssnmf {

// Plain-text matrix format: one row per line, comma-separated decimal
// literals, no header. Blank lines are ignored; ragged rows are rejected.

Matrix parse_csv_matrix(std::istream& in, const std::string& source = "<stream>");
Matrix read_csv_matrix(const std::filesystem::path& path);

void write_csv_matrix(std::ostream& out, const Matrix& M);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& M);

/// Shortest decimal literal that parses back to exactly x.
std::string format_double(double x);

} // namespace cssnmf
