#include "spectral_econ/matrix_io.hpp"

#include "spectral_econ/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace spectral_econ::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

double parse_number(std::string_view token, std::size_t line_no) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw InvalidInput(fmt::format("line {}: cannot parse number '{}'", line_no, token));
    }
    return value;
}

std::size_t parse_index(std::string_view token, std::size_t line_no) {
    token = trim(token);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw InvalidInput(fmt::format("line {}: cannot parse index '{}'", line_no, token));
    }
    return value;
}

}  // namespace

MatrixFormat format_for_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".csv") return MatrixFormat::dense_csv;
    if (ext == ".tsv" || ext == ".txt" || ext == ".edges") return MatrixFormat::edge_list_tsv;
    if (ext == ".json") return MatrixFormat::json;
    throw InvalidInput(fmt::format("unrecognized matrix file extension '{}'", ext));
}

SquareMatrix parse_dense_csv(std::string_view text) {
    const auto lines = lines_of(text);
    const auto n = static_cast<Eigen::Index>(lines.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto cells = split(lines[static_cast<std::size_t>(i)], ',');
        if (static_cast<Eigen::Index>(cells.size()) != n) {
            throw InvalidInput(fmt::format("line {}: expected {} columns, found {}", i + 1, n,
                                           cells.size()));
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = parse_number(cells[static_cast<std::size_t>(j)],
                                   static_cast<std::size_t>(i + 1));
        }
    }
    return SquareMatrix(std::move(m));
}

SquareMatrix parse_edge_list(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front().substr(0, 2) != "n=") {
        throw InvalidInput("edge list must start with a header line 'n=<count>'");
    }
    const std::size_t n = parse_index(lines.front().substr(2), 1);
    const auto k = static_cast<Eigen::Index>(n);
    Matrix m = Matrix::Zero(k, k);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto cells = split(lines[l], '\t');
        if (cells.size() != 3) {
            throw InvalidInput(
                fmt::format("line {}: expected 'i<TAB>j<TAB>weight', got '{}'", l + 1, lines[l]));
        }
        const std::size_t i = parse_index(cells[0], l + 1);
        const std::size_t j = parse_index(cells[1], l + 1);
        if (i >= n || j >= n) {
            throw InvalidInput(fmt::format("line {}: edge ({}, {}) outside n = {}", l + 1, i, j, n));
        }
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            parse_number(cells[2], l + 1);
    }
    return SquareMatrix(std::move(m));
}

SquareMatrix matrix_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
        throw InvalidInput("matrix JSON must be an object with 'n' and 'entries'");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "n" && it.key() != "entries" && it.key() != "labels") {
            throw InvalidInput(fmt::format("unknown key '{}' in matrix JSON", it.key()));
        }
    }
    if (!j["n"].is_number_integer() || j["n"].get<long>() < 0) {
        throw InvalidInput("'n' must be a nonnegative integer");
    }
    const auto n = static_cast<std::size_t>(j["n"].get<long>());
    const auto& rows = j["entries"];
    if (!rows.is_array() || rows.size() != n) {
        throw InvalidInput(fmt::format("'entries' must hold {} rows", n));
    }
    const auto k = static_cast<Eigen::Index>(n);
    Matrix m(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != n) {
            throw InvalidInput(fmt::format("row {} must hold {} numbers", i, n));
        }
        for (std::size_t c = 0; c < n; ++c) {
            if (!row[c].is_number()) {
                throw InvalidInput(fmt::format("entry ({}, {}) is not a number", i, c));
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) {
        if (!j["labels"].is_array()) throw InvalidInput("'labels' must be an array of strings");
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw InvalidInput("'labels' must be an array of strings");
            labels.push_back(l.get<std::string>());
        }
    }
    return SquareMatrix(std::move(m), std::move(labels));
}

Json matrix_to_json(const SquareMatrix& m) {
    Json j;
    j["n"] = m.size();
    j["entries"] = matrix_rows_to_json(m.entries());
    if (!m.labels().empty()) j["labels"] = m.labels();
    return j;
}

std::string write_dense_csv(const SquareMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string write_edge_list(const SquareMatrix& m) {
    std::string out = fmt::format("n={}\n", m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (m(i, j) != 0.0) out += fmt::format("{}\t{}\t{}\n", i, j, format_double(m(i, j)));
        }
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Json read_json(const std::filesystem::path& path) {
    const auto text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(fmt::format("'{}': {}", path.string(), e.what()));
    }
}

SquareMatrix read_matrix(const std::filesystem::path& path) {
    const auto text = read_text(path);
    try {
        switch (format_for_path(path)) {
            case MatrixFormat::dense_csv: return parse_dense_csv(text);
            case MatrixFormat::edge_list_tsv: return parse_edge_list(text);
            case MatrixFormat::json: return matrix_from_json(Json::parse(text));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("'{}': {}", path.string(), e.what()));
    } catch (const InvalidInput& e) {
        throw InvalidInput(fmt::format("'{}': {}", path.string(), e.what()));
    }
    throw InvalidInput("unreachable matrix format");
}

void write_matrix(const SquareMatrix& m, const std::filesystem::path& path) {
    switch (format_for_path(path)) {
        case MatrixFormat::dense_csv: write_text(path, write_dense_csv(m)); return;
        case MatrixFormat::edge_list_tsv: write_text(path, write_edge_list(m)); return;
        case MatrixFormat::json: write_text(path, dump_json(matrix_to_json(m))); return;
    }
}

Vector parse_vector_csv(std::string_view text) {
    std::vector<double> values;
    std::size_t line_no = 0;
    for (auto line : lines_of(text)) {
        ++line_no;
        for (auto cell : split(line, ',')) {
            if (!trim(cell).empty()) values.push_back(parse_number(cell, line_no));
        }
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace spectral_econ::io
