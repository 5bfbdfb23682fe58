#include "cssnmf/csv.hpp"

#include "cssnmf/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace cssnmf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

Matrix parse_csv_matrix(std::istream& in, const std::string& source) {
    std::vector<double> values;
    Index cols = -1;
    Index rows = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        Index count = 0;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            const auto field = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
                throw DataError(source + ":" + std::to_string(lineno) + ": invalid number '" +
                                std::string(field) + "'");
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cols < 0) {
            cols = count;
        } else if (count != cols) {
            throw DataError(source + ":" + std::to_string(lineno) + ": ragged row (" +
                            std::to_string(count) + " fields, expected " + std::to_string(cols) + ")");
        }
        ++rows;
    }
    if (rows == 0) return Matrix(0, 0);
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = values[static_cast<size_t>(i * cols + j)];
    require_finite(M, source);
    return M;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_csv_matrix(in, path.string());
}

void write_csv_matrix(std::ostream& out, const Matrix& M) {
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_csv_matrix(out, M);
}

} // namespace cssnmf
