#ifndef MORPHTEST_FRAMEWORK_HPP
#define MORPHTEST_FRAMEWORK_HPP

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphtest/datum.hpp"

namespace morphtest {

/// Transform arguments did not satisfy the datamorphism's applicability
/// condition. Callers skip the case rather than treat it as a failure.
struct InapplicableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameters do not match the datamorphism's schema.
struct SchemaViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Named actual parameters of one datamorphism application.
using MorphParams = std::map<std::string, Datum>;

struct ParamSpec {
    std::string name;
    DatumKind kind = DatumKind::Number;
    std::optional<std::pair<double, double>> range;  // inclusive, numbers only
    Datum default_value;
};

/// A datamorphism: a named transformation over k input datums and a parameter
/// assignment, guarded by an applicability condition. Transforms must be
/// deterministic and produce datums of the framework's domain kind.
struct Datamorphism {
    std::string name;
    int arity = 1;
    std::vector<ParamSpec> param_schema;
    std::function<bool(std::span<const Datum>, const MorphParams&)> applicability;
    std::function<Datum(std::span<const Datum>, const MorphParams&)> transform;

    /// Schema defaults as a parameter assignment.
    MorphParams default_params() const;
    /// Fills omitted parameters from defaults; throws SchemaViolation on
    /// unknown names, kind mismatches, or out-of-range numbers.
    MorphParams resolve_params(const MorphParams& given) const;
};

struct LineageStep {
    std::string morphism;
    MorphParams params;
    /// Ids of the other arguments for arity > 1; the owning case's parent is
    /// implicit as the first argument.
    std::vector<CaseId> extra_args;

    bool operator==(const LineageStep&) const = default;
};

/// The application path from a seed to a case. Steps are stored in
/// application order: steps[0] was applied first.
struct Lineage {
    CaseId seed_id;
    std::vector<LineageStep> steps;

    bool is_seed() const { return steps.empty(); }
    bool operator==(const Lineage&) const = default;
};

struct TestCase {
    CaseId id;  // canonical_hash(datum); lineage never affects it
    Datum datum;
    Lineage lineage;
};

TestCase make_seed(const Datum& d);
TestCase make_mutant(const Datum& d, Lineage lineage);

/// A correctness relation bound to a sequence of unary datamorphisms.
/// relation(base output, m mutant outputs) must hold on a correct subject.
struct Metamorphism {
    std::string name;
    std::vector<std::pair<std::string, MorphParams>> morphisms;  // length m >= 1
    std::function<bool(const Datum&, std::span<const Datum>, double tolerance)> relation;
    double tolerance = 1e-9;
};

/// The test framework triple: seeds, datamorphisms, metamorphisms.
struct Framework {
    std::string name;
    DatumKind domain_kind = DatumKind::Number;
    std::vector<TestCase> seeds;
    std::vector<Datamorphism> datamorphisms;
    std::vector<Metamorphism> metamorphisms;

    const Datamorphism* find_morphism(const std::string& name) const;
    /// Checks seed conformance/uniqueness and metamorphism references;
    /// throws std::runtime_error on the first violation.
    void validate() const;
};

/// Deduplicated, insertion-ordered set of test cases.
class Pool {
  public:
    /// Inserts iff the id is absent. The first lineage encountered for a
    /// datum is kept; later duplicates are dropped.
    bool insert(TestCase c);

    bool contains(const CaseId& id) const { return index_.count(id) != 0; }
    const TestCase* find(const CaseId& id) const;
    const std::vector<TestCase>& cases() const { return cases_; }
    std::size_t size() const { return cases_.size(); }

    bool truncated() const { return truncated_; }
    void mark_truncated() { truncated_ = true; }

  private:
    std::vector<TestCase> cases_;
    std::unordered_map<CaseId, std::size_t> index_;
    bool truncated_ = false;
};

/// Applies a datamorphism. Throws InapplicableError when the applicability
/// condition rejects the arguments, SchemaViolation on malformed params.
Datum apply_datamorphism(const Datamorphism& phi, std::span<const Datum> args,
                         const MorphParams& params);

/// Re-applies a case's lineage starting from its seed, resolving extra
/// arguments from the pool. Returns the reproduced datum.
Datum replay_lineage(const Framework& fw, const Pool& pool, const TestCase& c);

}  // namespace morphtest

#endif
