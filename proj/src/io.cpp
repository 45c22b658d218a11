#include "lts/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lts {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, size_t line_no,
                  const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    if (begin == end) {
        throw DataError(path + ":" + std::to_string(line_no) + ": missing value in column '" +
                        column + "'");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad numeral '" +
                        std::string(begin, end) + "' in column '" + column + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& response) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    Index response_col = -1;
    Index reliable_col = -1;
    std::vector<Index> feature_cols;
    std::vector<std::string> feature_names;
    for (size_t j = 0; j < header.size(); ++j) {
        std::string name = header[j];
        while (!name.empty() && (name.back() == ' ' || name.back() == '\r')) name.pop_back();
        if (name == response) {
            response_col = static_cast<Index>(j);
        } else if (name == "reliable") {
            reliable_col = static_cast<Index>(j);
        } else {
            feature_cols.push_back(static_cast<Index>(j));
            feature_names.push_back(name);
        }
    }
    if (response_col < 0) {
        throw DataError(path + ": no column named '" + response + "'");
    }
    if (feature_cols.empty()) throw DataError(path + ": no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<bool> reliable;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(feature_cols.size() + 1);
        for (size_t k = 0; k < feature_cols.size(); ++k) {
            row.push_back(parse_cell(cells[static_cast<size_t>(feature_cols[k])], path, line_no,
                                     feature_names[k]));
        }
        row.push_back(parse_cell(cells[static_cast<size_t>(response_col)], path, line_no,
                                 response));
        if (reliable_col >= 0) {
            const double r = parse_cell(cells[static_cast<size_t>(reliable_col)], path, line_no,
                                        "reliable");
            if (r != 0.0 && r != 1.0) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": reliable flag must be 0 or 1");
            }
            reliable.push_back(r == 1.0);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    Dataset data;
    const Index m = static_cast<Index>(rows.size());
    const Index n = static_cast<Index>(feature_cols.size());
    data.features.resize(m, n);
    data.response.resize(m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
            data.features(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
        data.response(i) = rows[static_cast<size_t>(i)][static_cast<size_t>(n)];
    }
    data.reliable = std::move(reliable);
    data.column_names = std::move(feature_names);
    data.validate();
    return data;
}

void write_csv(const std::string& path, const Dataset& data, const std::string& response_name) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    const Index m = data.rows();
    const Index n = data.cols();
    for (Index j = 0; j < n; ++j) {
        const std::string name = data.column_names.empty()
                                     ? "x" + std::to_string(j + 1)
                                     : data.column_names[static_cast<size_t>(j)];
        out << name << ',';
    }
    out << response_name;
    if (!data.reliable.empty()) out << ",reliable";
    out << '\n';
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) out << format_double(data.features(i, j)) << ',';
        out << format_double(data.response(i));
        if (!data.reliable.empty()) out << ',' << (data.reliable[static_cast<size_t>(i)] ? 1 : 0);
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

GroundTruth read_truth_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    GroundTruth truth;
    const auto& xs = j.at("x_star");
    truth.x_star.resize(static_cast<Index>(xs.size()));
    for (size_t k = 0; k < xs.size(); ++k) {
        truth.x_star(static_cast<Index>(k)) = xs[k].get<double>();
    }
    for (const auto& o : j.at("outliers")) {
        truth.outlier_set.push_back(o.get<Index>());
    }
    return truth;
}

void write_truth_json(const std::string& path, const GroundTruth& truth) {
    nlohmann::json j;
    j["x_star"] = std::vector<double>(truth.x_star.data(),
                                      truth.x_star.data() + truth.x_star.size());
    j["outliers"] = truth.outlier_set;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing " + path);
}

}  // namespace lts
