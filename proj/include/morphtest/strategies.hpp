#ifndef MORPHTEST_STRATEGIES_HPP
#define MORPHTEST_STRATEGIES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morphtest/framework.hpp"
#include "morphtest/runner.hpp"

namespace morphtest {

/// Requested pool could not fit under the configured limits.
struct LimitExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownFitness : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Both endpoints classified identically; bisection is inapplicable.
struct SameClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bounds that keep potentially infinite generation finite. When a limit
/// cuts generation short the resulting pool is flagged truncated.
struct GenLimits {
    std::size_t max_pool_size = 10000;
    std::size_t max_depth = 8;  // max lineage steps
    /// Per-morphism parameter assignments to enumerate. Morphisms without an
    /// entry use a single assignment of schema defaults.
    std::map<std::string, std::vector<MorphParams>> param_grid;

    std::vector<MorphParams> grid_for(const Datamorphism& phi) const;
};

struct GaConfig {
    std::size_t population_cap = 50;
    std::size_t generations = 20;
    std::size_t tournament_size = 2;
    std::size_t elitism_count = 1;
    std::uint64_t rng_seed = 0;
    std::string fitness = "max_numeric";  // max_numeric | diversity | violations
    /// Required by the "violations" fitness; ignored otherwise.
    const Subject* subject = nullptr;
};

struct ExploreConfig {
    double epsilon = 1e-6;
    std::size_t max_iterations = 64;
    /// Distance between two datums; defaults to |a-b| for numbers and the
    /// L2 distance for numeric vectors.
    std::function<double(const Datum&, const Datum&)> distance;
};

double default_distance(const Datum& a, const Datum& b);

/// Closure of the seeds under all unary datamorphisms and grid parameters,
/// computed breadth-first in deterministic order. Stops at fixpoint or when
/// a limit is hit (pool flagged truncated).
Pool generate_exhaustive(const Framework& fw, const GenLimits& limits);

struct KwayOptions {
    /// When true, tuples with repeated datamorphisms ((f,f)) are not targets.
    bool distinct_only = false;
};

/// Greedy pool achieving k-way combinatorial coverage: for every seed and
/// every ordered n-tuple of unary datamorphisms (n = 1..k), some case's
/// lineage embeds the tuple. Throws LimitExceeded when max_pool_size cannot
/// hold the required cases.
Pool generate_kway(const Framework& fw, std::size_t k, const GenLimits& limits,
                   const KwayOptions& opts = {});

struct CoverageReport {
    std::vector<double> per_n;  // index n in 0..k
    double aggregate = 0.0;     // min over n
};

/// Fraction of (seed, ordered n-tuple) targets realized by some case whose
/// lineage starts at the seed and embeds the tuple as a subsequence in
/// composition order: tuple (f,g) is covered when g is applied at an earlier
/// step than f.
CoverageReport measure_kway_coverage(const Pool& pool, const Framework& fw,
                                     std::size_t k, const KwayOptions& opts = {});

/// Random strategy: repeatedly picks a pool case, unary datamorphism and grid
/// parameter uniformly, inserting on success, until `count` insertions or the
/// attempt budget (50 x count consecutive non-insertions) is exhausted.
/// Fully determined by rng_seed.
Pool generate_random(const Framework& fw, std::size_t count, std::uint64_t rng_seed,
                     const GenLimits& limits);

struct GaResult {
    Pool pool;                       // final population, elite first
    std::vector<double> best_trace;  // best fitness per generation, index 0 = initial
};

/// Genetic strategy: seeds as the initial population, datamorphisms as
/// mutation operators, tournament selection with elitism. The best-fitness
/// trace is non-decreasing by construction.
GaResult generate_optimal(const Framework& fw, const GaConfig& cfg,
                          const GenLimits& limits = {});

struct ExploreResult {
    Datum lo;
    Datum hi;
    std::size_t iterations = 0;
    std::vector<TestCase> trace;  // every probed midpoint, in probe order
};

/// Exploratory bisection between two differently-classified inputs using a
/// binary midpoint datamorphism, narrowing until distance(lo, hi) <= epsilon.
/// The returned pair always straddles the boundary: subject(lo) != subject(hi).
ExploreResult explore_boundary(const Subject& subject, const Datum& a, const Datum& b,
                               const Datamorphism& mid, const ExploreConfig& cfg);

}  // namespace morphtest

#endif
