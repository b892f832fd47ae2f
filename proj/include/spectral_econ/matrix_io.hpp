#pragma once

#include "spectral_econ/json_format.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace spectral_econ::io {

enum class MatrixFormat { dense_csv, edge_list_tsv, json };

// Format chosen from the extension: .csv, .tsv/.txt, .json.
MatrixFormat format_for_path(const std::filesystem::path& path);

SquareMatrix parse_dense_csv(std::string_view text);

// Header line "n=<count>", then "i<TAB>j<TAB>weight" with 0-based indices.
// Repeated (i, j) pairs accumulate.
SquareMatrix parse_edge_list(std::string_view text);

// {"n": <count>, "entries": [[...], ...], "labels": [...]?}
SquareMatrix matrix_from_json(const Json& j);
Json matrix_to_json(const SquareMatrix& m);

std::string write_dense_csv(const SquareMatrix& m);
std::string write_edge_list(const SquareMatrix& m);

SquareMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const SquareMatrix& m, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
Json read_json(const std::filesystem::path& path);

// Dense vector stored as CSV (one value per line, or a single row).
Vector parse_vector_csv(std::string_view text);

}  // namespace spectral_econ::io
