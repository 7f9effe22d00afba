#pragma once

// Two-port record files:
//   wavelength_nm,counts_port1,counts_port2
//   690,12,7
// Numbers are written with 17 significant digits so a write/read cycle is
// lossless.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "weakdelay/errors.hpp"
#include "weakdelay/spectrum.hpp"

namespace weakdelay::io {

inline constexpr const char* kRecordHeader = "wavelength_nm,counts_port1,counts_port2";

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_record_csv(std::ostream& os, const MeasurementRecord& record) {
    os << kRecordHeader << '\n';
    const auto& grid = record.grid_nm();
    const auto& w1 = record.port1().weights();
    const auto& w2 = record.port2().weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_g17(grid[i]) << ',' << format_g17(w1[i]) << ',' << format_g17(w2[i]) << '\n';
    }
    if (!os) throw FormatError("failed writing record CSV");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_field(const std::string& raw, std::size_t line, const char* name) {
    const std::string field = trim(raw);
    if (field.empty()) throw FormatError("line " + std::to_string(line) + ": empty " + name, line);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE) {
        throw FormatError("line " + std::to_string(line) + ": " + name + " is not a number: '" + field + "'", line);
    }
    if (!std::isfinite(v)) throw FormatError("line " + std::to_string(line) + ": " + name + " is not finite", line);
    return v;
}

} // namespace detail

/// Parse a record file. Errors carry the 1-based line number.
inline MeasurementRecord read_record_csv(std::istream& is) {
    std::string text;
    std::size_t line_no = 0;
    if (!std::getline(is, text)) throw FormatError("record CSV is empty", 1);
    ++line_no;
    if (detail::trim(text) != kRecordHeader) {
        throw FormatError("line 1: expected header '" + std::string(kRecordHeader) + "'", 1);
    }
    std::vector<double> grid, c1, c2;
    while (std::getline(is, text)) {
        ++line_no;
        if (detail::trim(text).empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos; (pos = text.find(',', start)) != std::string::npos; start = pos + 1) {
            fields.push_back(text.substr(start, pos - start));
        }
        fields.push_back(text.substr(start));
        if (fields.size() != 3) {
            throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                                  std::to_string(fields.size()),
                              line_no);
        }
        const double wl = detail::parse_field(fields[0], line_no, "wavelength_nm");
        const double a = detail::parse_field(fields[1], line_no, "counts_port1");
        const double b = detail::parse_field(fields[2], line_no, "counts_port2");
        if (!(wl > 0.0)) throw FormatError("line " + std::to_string(line_no) + ": wavelength must be positive", line_no);
        if (a < 0.0 || b < 0.0) throw FormatError("line " + std::to_string(line_no) + ": negative count", line_no);
        if (!grid.empty() && wl == grid.back()) {
            throw FormatError("line " + std::to_string(line_no) + ": duplicate wavelength", line_no);
        }
        if (!grid.empty() && wl < grid.back()) {
            throw FormatError("line " + std::to_string(line_no) + ": wavelengths must increase", line_no);
        }
        grid.push_back(wl);
        c1.push_back(a);
        c2.push_back(b);
    }
    if (grid.size() < 2) throw FormatError("record CSV needs at least 2 data rows", line_no);
    try {
        return {Spectrum(grid, std::move(c1)), Spectrum(grid, std::move(c2))};
    } catch (const DegenerateError& e) {
        throw FormatError(std::string("record CSV: ") + e.what(), line_no);
    }
}

inline MeasurementRecord read_record_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open record file: " + path);
    try {
        return read_record_csv(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what(), e.line());
    }
}

inline void write_record_csv(const std::string& path, const MeasurementRecord& record) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file: " + path);
    write_record_csv(out, record);
}

} // namespace weakdelay::io
