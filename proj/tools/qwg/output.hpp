#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace qwg::cli {

// Comma-separated table; numbers are printed with %.12g so reruns are byte-identical.
class Table {
public:
    explicit Table(std::vector<std::string> columns);

    Table& row();
    Table& add(double v);
    Table& add(long long v);
    Table& add(const std::string& v);

    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y; // NaN breaks the polyline
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::vector<double> hlines; // dashed reference levels

    void write(const std::filesystem::path& path) const;
};

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

} // namespace qwg::cli
