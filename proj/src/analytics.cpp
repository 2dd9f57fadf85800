#include "morphtest/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "morphtest/io.hpp"

namespace morphtest {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

MetricTable build_metric_table(const Pool& pool, const ExecutionMap& records,
                               const ScoreExtractor& extractor) {
    MetricTable table;
    std::unordered_map<CaseId, std::size_t> row_index;
    std::unordered_map<std::string, std::size_t> col_index;

    for (const auto& c : pool.cases()) {
        if (!c.lineage.is_seed()) continue;
        row_index.emplace(c.id, table.row_ids.size());
        table.row_ids.push_back(c.id);
    }
    for (const auto& c : pool.cases()) {
        if (c.lineage.is_seed()) continue;
        if (c.lineage.steps.size() > 1)
            throw ShapeError("mutant " + c.id + " has lineage depth " +
                             std::to_string(c.lineage.steps.size()) +
                             "; the table expects single-step mutants");
        const std::string& col = c.lineage.steps[0].morphism;
        if (col_index.emplace(col, table.column_ids.size()).second)
            table.column_ids.push_back(col);
    }

    table.cells.assign(table.row_ids.size(),
                       std::vector<std::optional<double>>(table.column_ids.size()));

    for (const auto& c : pool.cases()) {
        if (c.lineage.is_seed()) continue;
        auto row_it = row_index.find(c.lineage.seed_id);
        if (row_it == row_index.end()) continue;  // seed not in pool: no row
        std::size_t row = row_it->second;
        std::size_t col = col_index.at(c.lineage.steps[0].morphism);
        if (table.cells[row][col].has_value()) continue;  // first mutant wins

        auto rec_it = records.find(c.id);
        if (rec_it == records.end() || !rec_it->second.ok()) continue;  // Missing
        table.cells[row][col] = extractor(rec_it->second.output);
    }
    return table;
}

namespace {

ColumnStats stats_of(const std::vector<double>& values, std::size_t missing,
                     bool population) {
    ColumnStats s;
    s.count = values.size();
    s.missing = missing;
    if (values.empty()) return s;
    s.defined = true;
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    if (values.size() > 1 || population) {
        double ss = 0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (population ? values.size() : values.size() - 1));
    }
    return s;
}

}  // namespace

TableSummary summarize(const MetricTable& table, bool population_stddev) {
    TableSummary summary;
    std::vector<double> all;
    std::size_t all_missing = 0;

    for (std::size_t col = 0; col < table.column_ids.size(); ++col) {
        std::vector<double> values;
        std::size_t missing = 0;
        for (std::size_t row = 0; row < table.row_ids.size(); ++row) {
            const auto& cell = table.cells[row][col];
            if (cell) {
                values.push_back(*cell);
                all.push_back(*cell);
            } else {
                ++missing;
                ++all_missing;
            }
        }
        summary.columns.push_back(stats_of(values, missing, population_stddev));
    }
    summary.overall = stats_of(all, all_missing, population_stddev);
    return summary;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw LengthMismatch("pearson: vectors have different lengths");
    if (x.size() < 2)
        throw LengthMismatch("pearson: need at least two observations");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0)
        throw ZeroVariance("pearson: a vector has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

std::string emit_csv(const MetricTable& table, const TableSummary& summary) {
    std::ostringstream out;
    out << "seed";
    for (const auto& col : table.column_ids) out << ',' << csv_quote(col);
    out << '\n';

    for (std::size_t row = 0; row < table.row_ids.size(); ++row) {
        out << csv_quote(table.row_ids[row]);
        for (const auto& cell : table.cells[row]) {
            out << ',';
            if (cell) out << format_double(*cell);
        }
        out << '\n';
    }

    auto footer = [&](const char* label, auto value_of) {
        out << label;
        for (const auto& col : summary.columns) {
            out << ',';
            out << value_of(col);
        }
        out << '\n';
    };
    footer("Average", [](const ColumnStats& c) {
        return c.defined ? format_double(c.mean) : std::string();
    });
    footer("StDev", [](const ColumnStats& c) {
        return c.defined ? format_double(c.stddev) : std::string();
    });
    footer("Count", [](const ColumnStats& c) { return std::to_string(c.count); });
    footer("NotRecognised",
           [](const ColumnStats& c) { return std::to_string(c.missing); });
    return out.str();
}

MetricTable table_from_csv(const std::string& csv) {
    MetricTable table;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (header) {
            for (std::size_t i = 1; i < fields.size(); ++i)
                table.column_ids.push_back(fields[i]);
            header = false;
            continue;
        }
        if (fields[0] == "Average" || fields[0] == "StDev" || fields[0] == "Count" ||
            fields[0] == "NotRecognised")
            continue;
        table.row_ids.push_back(fields[0]);
        std::vector<std::optional<double>> row(table.column_ids.size());
        for (std::size_t i = 1; i < fields.size() && i - 1 < row.size(); ++i) {
            if (fields[i].empty()) continue;
            double v = 0;
            auto [ptr, ec] = std::from_chars(fields[i].data(),
                                             fields[i].data() + fields[i].size(), v);
            if (ec != std::errc())
                throw IoError("bad numeric CSV field: " + fields[i]);
            row[i - 1] = v;
        }
        table.cells.push_back(std::move(row));
    }
    return table;
}

nlohmann::json emit_json(const MetricTable& table, const TableSummary& summary,
                         const CheckResult* verdicts, nlohmann::json meta) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& row : table.cells) {
        nlohmann::json jrow = nlohmann::json::array();
        for (const auto& cell : row)
            jrow.push_back(cell ? nlohmann::json(*cell) : nlohmann::json(nullptr));
        cells.push_back(std::move(jrow));
    }

    auto stats_json = [](const ColumnStats& s) {
        return nlohmann::json{{"mean", s.defined ? nlohmann::json(s.mean) : nullptr},
                              {"stddev", s.defined ? nlohmann::json(s.stddev) : nullptr},
                              {"count", s.count},
                              {"missing", s.missing}};
    };
    nlohmann::json columns = nlohmann::json::array();
    for (const auto& c : summary.columns) columns.push_back(stats_json(c));

    return {{"table",
             {{"rows", table.row_ids}, {"columns", table.column_ids}, {"cells", cells}}},
            {"summaries", {{"columns", columns}, {"overall", stats_json(summary.overall)}}},
            {"verdicts", verdicts ? check_result_to_json(*verdicts) : nlohmann::json(nullptr)},
            {"meta", std::move(meta)}};
}

MetricTable table_from_json(const nlohmann::json& report) {
    const auto& jt = report.at("table");
    MetricTable table;
    table.row_ids = jt.at("rows").get<std::vector<std::string>>();
    table.column_ids = jt.at("columns").get<std::vector<std::string>>();
    for (const auto& jrow : jt.at("cells")) {
        std::vector<std::optional<double>> row;
        for (const auto& cell : jrow)
            row.push_back(cell.is_null() ? std::nullopt
                                         : std::optional<double>(cell.get<double>()));
        table.cells.push_back(std::move(row));
    }
    return table;
}

}  // namespace morphtest
