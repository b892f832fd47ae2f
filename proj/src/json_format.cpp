#include "spectral_econ/json_format.hpp"

#include "spectral_econ/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace spectral_econ {

namespace {

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void write(const Json& j, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += Json(it.key()).dump();
                out += ": ";
                write(it.value(), indent, depth + 1, out);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Rows of numbers stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), is_scalar);
            if (flat) {
                out += "[";
                bool first = true;
                for (const auto& e : j) {
                    if (!first) out += ", ";
                    first = false;
                    write(e, indent, depth + 1, out);
                }
                out += "]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                write(e, indent, depth + 1, out);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case Json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt::format("{:.17g}", v);
}

std::string dump_json(const Json& value, int indent) {
    std::string out;
    write(value, indent, 0, out);
    out += "\n";
    return out;
}

Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const Json& j, const char* field) {
    if (!j.is_array()) throw InvalidInput(fmt::format("'{}' must be an array of numbers", field));
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw InvalidInput(fmt::format("'{}'[{}] is not a number", field, i));
        }
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json matrix_rows_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace spectral_econ
