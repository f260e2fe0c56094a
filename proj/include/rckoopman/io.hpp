#pragma once

// CSV and structured-text helpers shared by the artifact writers.

#include <iosfwd>
#include <string>
#include <vector>

#include "rckoopman/linalg.hpp"

namespace rck::io {

/// Shortest-safe text for a double: 17 significant digits.
std::string format_double(double x);

/// Writes rows of `m` as comma-separated values, optionally preceded by a
/// header line.
void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& header = {});

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

/// Parses a numeric CSV. When `has_header` is set the first line is kept as
/// column names.
CsvTable read_csv(std::istream& in, bool has_header);
CsvTable read_csv(const std::string& path, bool has_header);

/// Eigenvalues as `re,im` rows.
Matrix complex_columns(const CVector& v);

std::vector<std::string> numbered(const std::string& prefix, Index count, int first = 1);

}  // namespace rck::io
