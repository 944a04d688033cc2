#pragma once

/// @file io.hpp
/// @brief Field files: canonical CSV (bitwise round trip) and legacy VTK.
///
/// CSV layout:
///   # field: <name>
///   # grid: <nx> <ny> <lx> <ly>
///   # time: <t>
///   then ny rows (j = 1..ny) of nx comma-separated values (i = 1..nx).
/// Numbers use the shortest representation that parses back to the same double.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "semicomp/grid.hpp"

namespace semicomp {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw FormatError("format_double: conversion failed");
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError("not a number: '" + std::string(s) + "'");
    return v;
}

struct FieldFile {
    std::string name;
    double time = 0.0;
    ScalarField field;
};

inline void write_field_csv(std::ostream& os, const FieldFile& f) {
    const GridSpec& g = f.field.grid();
    os << "# field: " << f.name << '\n';
    os << "# grid: " << g.nx << ' ' << g.ny << ' ' << format_double(g.lx) << ' ' << format_double(g.ly) << '\n';
    os << "# time: " << format_double(f.time) << '\n';
    for (int j = 1; j <= g.ny; ++j) {
        for (int i = 1; i <= g.nx; ++i) {
            if (i > 1) os << ',';
            os << format_double(f.field(i, j));
        }
        os << '\n';
    }
}

inline FieldFile read_field_csv(std::istream& is) {
    auto header = [&](const std::string& key) {
        std::string line;
        if (!std::getline(is, line)) throw FormatError("field file: missing '# " + key + ":' header");
        const std::string prefix = "# " + key + ":";
        if (line.rfind(prefix, 0) != 0) throw FormatError("field file: expected '" + prefix + "', got '" + line + "'");
        std::string rest = line.substr(prefix.size());
        while (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        if (!rest.empty() && rest.back() == '\r') rest.pop_back();
        return rest;
    };
    FieldFile f;
    f.name = header("field");
    std::istringstream gs(header("grid"));
    std::string snx, sny, slx, sly;
    if (!(gs >> snx >> sny >> slx >> sly)) throw FormatError("field file: grid header needs nx ny lx ly");
    GridSpec g{static_cast<int>(parse_double(snx)), static_cast<int>(parse_double(sny)), parse_double(slx),
               parse_double(sly)};
    g.validate();
    f.time = parse_double(header("time"));
    f.field = ScalarField(g);
    std::string line;
    for (int j = 1; j <= g.ny; ++j) {
        if (!std::getline(is, line)) throw FormatError("field file: expected " + std::to_string(g.ny) + " rows");
        std::string_view rest(line);
        for (int i = 1; i <= g.nx; ++i) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (i == g.nx))
                throw FormatError("field file: row " + std::to_string(j) + " must have " + std::to_string(g.nx) + " values");
            f.field(i, j) = parse_double(rest.substr(0, comma));
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
    }
    return f;
}

inline void write_field_csv(const std::string& path, const FieldFile& f) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_field_csv(os, f);
}

inline FieldFile read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    try {
        return read_field_csv(is);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// Legacy-VTK ASCII structured points with point data at cell centres.
inline void write_vtk(std::ostream& os, const std::string& title, const VectorField& v, const ScalarField& p) {
    const GridSpec& g = p.grid();
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.nx << ' ' << g.ny << " 1\n";
    os << "ORIGIN " << format_double(0.5 * g.dx()) << ' ' << format_double(0.5 * g.dy()) << " 0\n";
    os << "SPACING " << format_double(g.dx()) << ' ' << format_double(g.dy()) << " 1\n";
    os << "POINT_DATA " << g.cells() << "\nSCALARS p double 1\nLOOKUP_TABLE default\n";
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) os << format_double(p(i, j)) << '\n';
    os << "VECTORS v double\n";
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) os << format_double(v.x(i, j)) << ' ' << format_double(v.y(i, j)) << " 0\n";
}

inline void write_vtk(const std::string& path, const std::string& title, const VectorField& v, const ScalarField& p) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_vtk(os, title, v, p);
}

}  // namespace semicomp
