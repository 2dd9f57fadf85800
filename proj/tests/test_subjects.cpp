#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "morphtest/analytics.hpp"
#include "morphtest/subjects.hpp"

using namespace morphtest;
using namespace morphtest::testing;

namespace {

std::optional<double> numeric_score(const Datum& d) {
    return d.kind() == DatumKind::Number ? std::optional(d.as_number()) : std::nullopt;
}

CheckResult check_synth(const SynthConfig& cfg, Pool& pool_out, ExecutionMap& records_out) {
    auto [subject, fw] = synthetic_recognizer(cfg);
    pool_out = generate_kway(fw, 1, {});
    records_out = index_records(execute_pool(subject, pool_out));
    return check_metamorphisms(fw, pool_out, records_out);
}

}  // namespace

TEST_CASE("bundled frameworks validate") {
    sine_framework(5).validate();
    classifier_framework().validate();
    auto [subject, fw] = synthetic_recognizer({.n_seeds = 3});
    fw.validate();
    CHECK(fw.datamorphisms.size() == kSynthAttrCount);
    CHECK(fw.metamorphisms.size() == kSynthAttrCount);
}

TEST_CASE("sine subjects at characteristic points") {
    Subject correct = sine_correct_subject();
    Subject faulty = sine_faulty_subject();
    double half_pi = std::numbers::pi / 2;

    CHECK(correct.evaluate(Datum::number(half_pi)).as_number() == doctest::Approx(1.0));
    CHECK(correct.evaluate(Datum::number(0.0)).as_number() == doctest::Approx(0.0));

    // faulty subject: sin(x) + 0.001x, so reflection symmetry breaks by
    // 0.001*|pi - 2x|; at the fixed point pi/2 it still holds.
    double at0 = faulty.evaluate(Datum::number(0.0)).as_number();
    double at_pi = faulty.evaluate(Datum::number(std::numbers::pi)).as_number();
    CHECK(std::abs(at_pi - at0) == doctest::Approx(0.001 * std::numbers::pi));
    double fixed = faulty.evaluate(Datum::number(half_pi)).as_number();
    CHECK(fixed == doctest::Approx(1.0 + 0.001 * half_pi));
}

TEST_CASE("sine framework seeds span a uniform grid over [0, pi]") {
    Framework fw = sine_framework(5);
    REQUIRE(fw.seeds.size() == 5);
    CHECK(fw.seeds.front().datum.as_number() == 0.0);
    CHECK(fw.seeds.back().datum.as_number() == doctest::Approx(std::numbers::pi));
    CHECK(fw.seeds[1].datum.as_number() == doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("threshold classifier puts the boundary in the upper class") {
    Subject c = threshold_classifier(0.5);
    CHECK(c.evaluate(Datum::number(0.4999)).as_text() == "A");
    CHECK(c.evaluate(Datum::number(0.5)).as_text() == "B");
    CHECK(c.evaluate(Datum::number(0.5001)).as_text() == "B");
}

TEST_CASE("midpoint morphism is the exact arithmetic mean") {
    Datamorphism mid = midpoint_morphism();
    REQUIRE(mid.arity == 2);
    std::vector<Datum> args{Datum::number(0.25), Datum::number(0.75)};
    CHECK(apply_datamorphism(mid, args, {}).as_number() == 0.5);
}

TEST_CASE("synthetic recognizer scores seeds at exactly 100") {
    auto [subject, fw] = synthetic_recognizer({.n_seeds = 20});
    for (const auto& s : fw.seeds) {
        CHECK(subject.evaluate(s.datum).as_number() == 100.0);
    }
}

TEST_CASE("attribute shift of 0.13 scores every mutant at exactly 99") {
    auto [subject, fw] = synthetic_recognizer({.n_seeds = 10, .delta = 0.13});
    Pool pool = generate_kway(fw, 1, {});
    REQUIRE(pool.size() == 10 * (1 + kSynthAttrCount));
    for (const auto& c : pool.cases()) {
        if (c.lineage.is_seed()) continue;
        // 100 * (1 - 0.13/13) = 99, exact after 6-decimal rounding
        CHECK(subject.evaluate(c.datum).as_number() == 99.0);
    }
}

TEST_CASE("delta 0.13 table: mean exactly 99, stddev exactly 0") {
    Pool pool;
    ExecutionMap records;
    check_synth({.n_seeds = 10, .delta = 0.13}, pool, records);
    MetricTable t = build_metric_table(pool, records, numeric_score);
    TableSummary s = summarize(t);
    REQUIRE(s.columns.size() == kSynthAttrCount);
    for (const auto& col : s.columns) {
        CHECK(col.mean == 99.0);
        CHECK(col.stddev == 0.0);
        CHECK(col.count == 10);
        CHECK(col.missing == 0);
    }
}

TEST_CASE("tiny perturbations round to a similarity of exactly 100 and pass") {
    Pool pool;
    ExecutionMap records;
    CheckResult result = check_synth({.n_seeds = 10, .delta = 1e-9}, pool, records);
    for (const auto& c : pool.cases()) {
        REQUIRE(records.at(c.id).ok());
        CHECK(records.at(c.id).output.as_number() == 100.0);
    }
    for (const auto& s : result.summaries) {
        CHECK(s.failed == 0);
        CHECK(s.errored == 0);
        CHECK(s.passed == 10);
    }
}

TEST_CASE("zero delta collapses mutants into their seeds: nothing can fail") {
    Pool pool;
    ExecutionMap records;
    CheckResult result = check_synth({.n_seeds = 10, .delta = 0.0}, pool, records);
    // identity perturbations dedup away, so every check is vacuous
    CHECK(pool.size() == 10);
    for (const auto& s : result.summaries) {
        CHECK(s.failed == 0);
        CHECK(s.errored == 0);
        CHECK(s.inapplicable == 10);
    }
}

TEST_CASE("error fraction produces roughly that share of recognition failures") {
    SynthConfig cfg{.n_seeds = 50, .delta = 0.13, .error_fraction = 0.2};
    Pool pool;
    ExecutionMap records;
    check_synth(cfg, pool, records);

    std::size_t mutants = 0, errors = 0;
    for (const auto& c : pool.cases()) {
        if (c.lineage.is_seed()) {
            CHECK(records.at(c.id).ok());  // seeds never fail recognition
            continue;
        }
        ++mutants;
        errors += !records.at(c.id).ok();
    }
    REQUIRE(mutants == 50 * kSynthAttrCount);
    // Binomial(650, 0.2): mean 130, 3 sigma ~ 30.6
    CHECK(errors >= 99);
    CHECK(errors <= 161);
}

TEST_CASE("recognition failures are deterministic in the datum") {
    SynthConfig cfg{.n_seeds = 20, .delta = 0.13, .error_fraction = 0.3};
    Pool pool_a, pool_b;
    ExecutionMap rec_a, rec_b;
    check_synth(cfg, pool_a, rec_a);
    check_synth(cfg, pool_b, rec_b);
    REQUIRE(pool_a.size() == pool_b.size());
    for (const auto& c : pool_a.cases())
        CHECK(rec_a.at(c.id).kind == rec_b.at(c.id).kind);
}

TEST_CASE("end-to-end synthetic table has the full seeds-by-operators shape") {
    SynthConfig cfg{.n_seeds = 200, .delta = 0.13};
    Pool pool;
    ExecutionMap records;
    check_synth(cfg, pool, records);
    MetricTable t = build_metric_table(pool, records, numeric_score);
    CHECK(t.row_ids.size() == 200);
    CHECK(t.column_ids.size() == kSynthAttrCount);

    std::string csv = emit_csv(t, summarize(t));
    // header + 200 data rows + 4 footers
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 205);
}

TEST_CASE("subject and framework registries resolve their documented names") {
    for (const auto& name : list_subject_names()) {
        if (name.find('<') != std::string::npos) continue;  // parameterized template
        CHECK_NOTHROW(subject_by_name(name));
    }
    for (const auto& name : list_framework_names())
        CHECK_NOTHROW(framework_by_name(name).validate());
    CHECK(subject_by_name("classifier:0.25").evaluate(Datum::number(0.3)).as_text() == "B");
    CHECK_THROWS_AS(subject_by_name("no_such_subject"), std::invalid_argument);
    CHECK_THROWS_AS(framework_by_name("no_such_framework"), std::invalid_argument);
}
