#pragma once

// Tabular output for the CLI. CSV and Markdown round each column to its
// display precision; JSON carries the full-precision values.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "slopesize/corroute.hpp"
#include "slopesize/critvals.hpp"
#include "slopesize/powersim.hpp"

namespace slopesize::report {

enum class OutputFormat { csv, markdown, json };

std::optional<OutputFormat> parse_format(const std::string& name);

// How a column is displayed in CSV/Markdown.
enum class Display { integer, fixed, percent, text };

struct Column {
    std::string header;    // CSV/Markdown header
    std::string json_key;  // JSON field name
    Display display = Display::fixed;
    int decimals = 3;
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
};

void write(std::ostream& out, const Table& table, OutputFormat format);

Table table1_report(const std::vector<Table1Row>& rows);
Table power_report(const std::vector<PowerTableRow>& rows);
Table contrast_report(const std::vector<ContrastRow>& rows);
Table curve_report(const std::vector<std::pair<double, double>>& curve);

}  // namespace slopesize::report
