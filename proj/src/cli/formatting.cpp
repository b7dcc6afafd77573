#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "slopesize/report.hpp"

namespace slopesize::report {

namespace {

std::string display(const Cell& cell, const Column& column) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    const double v = std::get<double>(cell);
    char buf[64];
    switch (column.display) {
        case Display::integer:
            std::snprintf(buf, sizeof buf, "%.0f", v);
            break;
        case Display::percent:
            std::snprintf(buf, sizeof buf, "%.*f%%", column.decimals, 100.0 * v);
            break;
        case Display::fixed:
        case Display::text:
            std::snprintf(buf, sizeof buf, "%.*f", column.decimals, v);
            break;
    }
    return buf;
}

nlohmann::json to_json(const Cell& cell) {
    return std::visit([](const auto& v) { return nlohmann::json(v); }, cell);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::optional<OutputFormat> parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "markdown" || name == "md") return OutputFormat::markdown;
    if (name == "json") return OutputFormat::json;
    return std::nullopt;
}

void write(std::ostream& out, const Table& table, OutputFormat format) {
    const auto& cols = table.columns;
    switch (format) {
        case OutputFormat::csv: {
            for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << csv_escape(cols[j].header);
            out << '\n';
            for (const auto& row : table.rows) {
                for (std::size_t j = 0; j < cols.size(); ++j) {
                    out << (j ? "," : "") << csv_escape(display(row[j], cols[j]));
                }
                out << '\n';
            }
            break;
        }
        case OutputFormat::markdown: {
            out << '|';
            for (const auto& c : cols) out << ' ' << c.header << " |";
            out << "\n|";
            for (const auto& c : cols) out << (c.display == Display::text ? " --- |" : " ---: |");
            out << '\n';
            for (const auto& row : table.rows) {
                out << '|';
                for (std::size_t j = 0; j < cols.size(); ++j) out << ' ' << display(row[j], cols[j]) << " |";
                out << '\n';
            }
            break;
        }
        case OutputFormat::json: {
            auto arr = nlohmann::json::array();
            for (const auto& row : table.rows) {
                nlohmann::json obj = nlohmann::json::object();
                for (std::size_t j = 0; j < cols.size(); ++j) obj[cols[j].json_key] = to_json(row[j]);
                arr.push_back(std::move(obj));
            }
            out << arr.dump(2) << '\n';
            break;
        }
    }
}

Table table1_report(const std::vector<Table1Row>& rows) {
    Table t;
    t.columns = {{"samplesize", "samplesize", Display::integer, 0},
                 {"normal10", "normal10", Display::fixed, 3},
                 {"criticalvalue10", "criticalvalue10", Display::fixed, 3},
                 {"normal5", "normal5", Display::fixed, 3},
                 {"criticalvalue5", "criticalvalue5", Display::fixed, 3},
                 {"normal1", "normal1", Display::fixed, 3},
                 {"criticalvalue1", "criticalvalue1", Display::fixed, 3}};
    for (const auto& r : rows) {
        t.rows.push_back({r.samplesize, r.normal10, r.criticalvalue10, r.normal5, r.criticalvalue5, r.normal1,
                          r.criticalvalue1});
    }
    return t;
}

Table power_report(const std::vector<PowerTableRow>& rows) {
    Table t;
    t.columns = {{"lambda", "lambda", Display::fixed, 1},
                 {"power", "power", Display::percent, 0},
                 {"n", "n", Display::integer, 0},
                 {"mean", "mean", Display::fixed, 4},
                 {"sd", "sd", Display::fixed, 4}};
    for (const auto& r : rows) t.rows.push_back({r.lambda, r.power, r.n, r.mean, r.sd});
    return t;
}

Table contrast_report(const std::vector<ContrastRow>& rows) {
    Table t;
    t.columns = {{"Level", "alpha", Display::fixed, 2},
                 {"ES", "lambda", Display::fixed, 1},
                 {"corr", "rho", Display::fixed, 4},
                 {"power", "power", Display::percent, 0},
                 {"Slope Test", "n_slope", Display::integer, 0},
                 {"CorrTest", "n_corr", Display::integer, 0},
                 {"difference", "difference", Display::integer, 0}};
    for (const auto& r : rows) {
        t.rows.push_back({r.alpha, r.lambda, r.rho, r.target_power, r.n_slope, r.n_corr, r.difference});
    }
    return t;
}

Table curve_report(const std::vector<std::pair<double, double>>& curve) {
    Table t;
    t.columns = {{"lambda", "lambda", Display::fixed, 4}, {"rho", "rho", Display::fixed, 6}};
    for (const auto& [l, r] : curve) t.rows.push_back({l, r});
    return t;
}

}  // namespace slopesize::report
