#include "biascorr/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace biascorr::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

void write_csv(const std::string& path, const Row& header, const std::vector<Row>& rows) {
    auto out = open_for_write(path);
    auto emit = [&](const Row& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::logic_error("csv row width does not match header");
        emit(row);
    }
}

std::string meta_path(const std::string& csv_path) {
    std::filesystem::path p(csv_path);
    p.replace_extension(".meta.json");
    return p.string();
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("corrupt json in '" + path + "': " + e.what());
    }
}

}  // namespace biascorr::io
