#include "rckoopman/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rck::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
        out << '\n';
    }
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(out, m, header);
    if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(std::istream& in, bool has_header) {
    CsvTable table;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (first && has_header) {
            while (std::getline(ss, cell, ',')) table.header.push_back(cell);
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("read_csv: not a number: '" + cell + "'");
            }
            if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("read_csv: trailing characters in '" + cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("read_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    const Index cols = rows.empty() ? static_cast<Index>(table.header.size())
                                    : static_cast<Index>(rows.front().size());
    table.values.resize(static_cast<Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return table;
}

CsvTable read_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in, has_header);
}

Matrix complex_columns(const CVector& v) {
    Matrix out(v.size(), 2);
    for (Index i = 0; i < v.size(); ++i) {
        out(i, 0) = v(i).real();
        out(i, 1) = v(i).imag();
    }
    return out;
}

std::vector<std::string> numbered(const std::string& prefix, Index count, int first) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(first + i));
    return names;
}

}  // namespace rck::io
