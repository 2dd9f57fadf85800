#ifndef MORPHTEST_RUNNER_HPP
#define MORPHTEST_RUNNER_HPP

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "morphtest/framework.hpp"

namespace morphtest {

/// External subject process could not be started at all.
struct SubjectUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An external subject wrote a line that does not follow the wire protocol.
struct ProtocolViolation : std::runtime_error {
    ProtocolViolation(std::size_t line_number, const std::string& what)
        : std::runtime_error("protocol violation at subject output line " +
                             std::to_string(line_number) + ": " + what),
          line_number(line_number) {}
    std::size_t line_number;
};

/// Raised by in-process evaluators to signal a per-case subject failure.
struct SubjectFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExternalSettings {
    std::vector<std::string> command;
    int timeout_ms = 5000;
    int max_restarts = 3;
};

/// The program under test. Either a registered in-process evaluator or an
/// external command speaking the line-delimited JSON protocol.
struct Subject {
    std::string name;
    std::function<Datum(const Datum&)> evaluate;  // in-process when set
    std::optional<ExternalSettings> external;

    bool is_external() const { return external.has_value(); }
};

enum class OutcomeKind { Output, SubjectError, Timeout };

struct ExecutionRecord {
    CaseId case_id;
    OutcomeKind kind = OutcomeKind::Output;
    Datum output;         // valid when kind == Output
    std::string message;  // valid otherwise

    bool ok() const { return kind == OutcomeKind::Output; }
};

using ExecutionMap = std::map<CaseId, ExecutionRecord>;

enum class Verdict { Pass, Fail, Inapplicable, Error };

const char* to_string(Verdict v);

struct VerdictRecord {
    std::string metamorphism;
    CaseId base_id;
    std::vector<CaseId> mutant_ids;
    Verdict outcome = Verdict::Inapplicable;
};

struct VerdictSummary {
    std::string metamorphism;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t inapplicable = 0;
    std::size_t errored = 0;
};

struct CheckResult {
    std::vector<VerdictRecord> verdicts;
    std::vector<VerdictSummary> summaries;

    std::size_t total_failed() const;
};

/// Executes the subject on every pool case. External subjects are restarted
/// after a crash or timeout up to max_restarts; cases left after the final
/// crash become SubjectError records. `workers` > 1 fans out in-process
/// evaluation only.
std::vector<ExecutionRecord> execute_pool(const Subject& subject, const Pool& pool,
                                          int workers = 1);

ExecutionMap index_records(const std::vector<ExecutionRecord>& records);

/// Checks every metamorphism against every pool case. The i-th mutant of a
/// base case x is the pool case whose lineage extends x's by the first i+1
/// declared (morphism, params) steps; a missing mutant yields Inapplicable.
CheckResult check_metamorphisms(const Framework& fw, const Pool& pool,
                                const ExecutionMap& records);

}  // namespace morphtest

#endif
