#pragma once

#include "spectral_econ/square_matrix.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace spectral_econ {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point value printed at 17 significant
/// digits, so identical inputs give byte-identical text and every double
/// round-trips exactly.
std::string dump_json(const Json& value, int indent = 2);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const char* field);

Json matrix_rows_to_json(const Matrix& m);

std::string format_double(double v);

}  // namespace spectral_econ
