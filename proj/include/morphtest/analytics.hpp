#ifndef MORPHTEST_ANALYTICS_HPP
#define MORPHTEST_ANALYTICS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "morphtest/runner.hpp"

namespace morphtest {

/// A mutant with more than one lineage step was fed to the table builder.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Seeds x datamorphisms table of scores. Missing cells (subject failures)
/// are excluded from means and standard deviations and counted separately.
struct MetricTable {
    std::vector<CaseId> row_ids;          // seed case ids, first-appearance order
    std::vector<std::string> column_ids;  // datamorphism names
    std::vector<std::vector<std::optional<double>>> cells;  // [row][col]

    bool operator==(const MetricTable&) const = default;
};

struct ColumnStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) unless population_stddev was set
    std::size_t count = 0;
    std::size_t missing = 0;
    bool defined = false;  // false when no values contributed
};

struct TableSummary {
    std::vector<ColumnStats> columns;  // aligned with MetricTable::column_ids
    ColumnStats overall;               // over every cell in the table
};

/// Maps a subject output datum to a score, or nullopt for Missing.
using ScoreExtractor = std::function<std::optional<double>(const Datum&)>;

/// Extracts the score of each single-step mutant into the (seed, morphism)
/// cell. Subject errors and timeouts become Missing. Throws ShapeError on
/// mutants with lineage depth > 1.
MetricTable build_metric_table(const Pool& pool, const ExecutionMap& records,
                               const ScoreExtractor& extractor);

TableSummary summarize(const MetricTable& table, bool population_stddev = false);

/// Sample Pearson correlation coefficient.
double pearson(std::span<const double> x, std::span<const double> y);

/// CSV report mirroring the seeds-by-morphisms layout: header row of
/// morphism names, one row per seed, then Average / StDev / Count /
/// NotRecognised footer rows. Missing cells are empty fields. Numbers use
/// shortest round-trip formatting.
std::string emit_csv(const MetricTable& table, const TableSummary& summary);

/// Parses the data rows of an emitted CSV back into a table (footer rows are
/// recognized by label and skipped).
MetricTable table_from_csv(const std::string& csv);

/// Fixed {table, summaries, verdicts, meta} report shape.
nlohmann::json emit_json(const MetricTable& table, const TableSummary& summary,
                         const CheckResult* verdicts, nlohmann::json meta);

MetricTable table_from_json(const nlohmann::json& report);

std::string format_double(double v);

}  // namespace morphtest

#endif
