#pragma once

// CSV and metadata output.

#include "biascorr/numeric.hpp"

#include <json.hpp>
#include <string>
#include <vector>

namespace biascorr::io {

inline constexpr const char* kVersion = "1.0.0";

/// Round-trippable decimal text for a double.
std::string format_double(double v);

template <class T>
std::string format_value(const T& v) {
    if constexpr (std::is_same_v<T, double>) {
        return format_double(v);
    } else if constexpr (std::is_same_v<T, Real>) {
        return format_real(v, 30);
    } else {
        return format_rational(v);
    }
}

using Row = std::vector<std::string>;

void write_csv(const std::string& path, const Row& header, const std::vector<Row>& rows);

/// `out.csv` -> `out.meta.json`
std::string meta_path(const std::string& csv_path);

void write_json(const std::string& path, const nlohmann::json& j);

nlohmann::json read_json(const std::string& path);

}  // namespace biascorr::io
