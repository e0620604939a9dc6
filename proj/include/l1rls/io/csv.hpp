#pragma once

#include <Eigen/Core>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "l1rls/error.hpp"
#include "l1rls/trajectory.hpp"

namespace l1rls::io {

inline constexpr int kCsvSchemaVersion = 1;

/// Input file whose layout does not match what a command expects.
class SchemaError : public Error {
public:
    using Error::Error;
};

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvHeader {
    std::string tool_version;
    std::string config_hash;
    std::string provenance;
    int schema = 0;
};

/// Columns: n, mean_w_1..mean_w_L, msd, mse, emse. One comment line carries
/// tool version, schema version, provenance and config hash.
inline std::string trajectory_csv(const TrajectoryRecord& rec, const std::string& version,
                                  const std::string& config_hash) {
    std::ostringstream out;
    out << "# l1rls " << version << " schema=" << kCsvSchemaVersion << " provenance=" << to_string(rec.provenance)
        << " config_hash=" << config_hash << '\n';
    out << 'n';
    for (Eigen::Index i = 0; i < rec.taps(); ++i) out << ",mean_w_" << (i + 1);
    out << ",msd,mse,emse\n";
    for (std::size_t t = 0; t < rec.size(); ++t) {
        out << (t + 1);
        for (Eigen::Index i = 0; i < rec.taps(); ++i)
            out << ',' << format_number(rec.mean_w(static_cast<Eigen::Index>(t), i));
        out << ',' << format_number(rec.msd[t]) << ',' << format_number(rec.mse[t]) << ','
            << format_number(rec.emse[t]) << '\n';
    }
    return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
    if (!f) throw Error("write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline CsvHeader parse_comment(const std::string& line) {
    CsvHeader h;
    std::istringstream ss(line.substr(1));
    std::string tok;
    ss >> tok;  // tool name
    ss >> h.tool_version;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "schema") h.schema = std::atoi(val.c_str());
        if (key == "config_hash") h.config_hash = val;
        if (key == "provenance") h.provenance = val;
    }
    return h;
}

}  // namespace detail

struct LoadedTrajectory {
    CsvHeader header;
    TrajectoryRecord record;
};

inline LoadedTrajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read '" + path + "'");
    LoadedTrajectory out;
    std::string line;
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.header = detail::parse_comment(line);
            continue;
        }
        columns = detail::split(line);
        break;
    }
    if (out.header.schema != kCsvSchemaVersion)
        throw SchemaError(path + ": unsupported or missing schema version");
    if (columns.size() < 5 || columns.front() != "n" || columns[columns.size() - 3] != "msd" ||
        columns[columns.size() - 2] != "mse" || columns.back() != "emse")
        throw SchemaError(path + ": unexpected column layout");
    const auto taps = static_cast<Eigen::Index>(columns.size() - 4);
    for (Eigen::Index i = 0; i < taps; ++i)
        if (columns[static_cast<std::size_t>(i) + 1] != "mean_w_" + std::to_string(i + 1))
            throw SchemaError(path + ": unexpected column '" + columns[static_cast<std::size_t>(i) + 1] + "'");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split(line);
        if (cells.size() != columns.size())
            throw SchemaError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(columns.size()));
        std::vector<double> row(cells.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            char* end = nullptr;
            row[k] = std::strtod(cells[k].c_str(), &end);
            if (end == cells[k].c_str()) throw SchemaError(path + ": non-numeric cell on row " + std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }

    const Provenance prov = out.header.provenance == "theoretical" ? Provenance::theoretical : Provenance::empirical;
    TrajectoryRecord rec(prov, rows.size(), taps);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (Eigen::Index i = 0; i < taps; ++i)
            rec.mean_w(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i) + 1];
        rec.msd[t] = rows[t][static_cast<std::size_t>(taps) + 1];
        rec.mse[t] = rows[t][static_cast<std::size_t>(taps) + 2];
        rec.emse[t] = rows[t][static_cast<std::size_t>(taps) + 3];
    }
    out.record = std::move(rec);
    return out;
}

}  // namespace l1rls::io
