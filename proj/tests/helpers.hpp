#ifndef MORPHTEST_TESTS_HELPERS_HPP
#define MORPHTEST_TESTS_HELPERS_HPP

// Test-only oracles, independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "morphtest/framework.hpp"
#include "morphtest/strategies.hpp"

namespace morphtest::testing {

inline Datamorphism unary(std::string name, std::function<Datum(const Datum&)> fn,
                          std::function<bool(const Datum&)> guard = {}) {
    Datamorphism phi;
    phi.name = std::move(name);
    phi.arity = 1;
    phi.transform = [fn](std::span<const Datum> args, const MorphParams&) {
        return fn(args[0]);
    };
    if (guard)
        phi.applicability = [guard](std::span<const Datum> args, const MorphParams&) {
            return guard(args[0]);
        };
    return phi;
}

/// Bits-domain framework with one set-bit morphism per listed position.
inline Framework bit_framework(std::size_t width, const std::vector<std::size_t>& positions) {
    Framework fw;
    fw.name = "bits";
    fw.domain_kind = DatumKind::Bits;
    fw.seeds.push_back(make_seed(Datum::bits(std::vector<bool>(width, false))));
    for (std::size_t pos : positions) {
        fw.datamorphisms.push_back(unary("set" + std::to_string(pos), [pos](const Datum& d) {
            auto bits = d.as_bits().bits;
            bits.at(pos) = true;
            return Datum::bits(std::move(bits));
        }));
    }
    return fw;
}

/// Text-domain framework whose morphisms append their own tag, so every
/// application sequence yields a distinct datum (free monoid).
inline Framework append_framework(const std::vector<std::string>& tags,
                                  const std::vector<std::string>& seed_texts = {"s"}) {
    Framework fw;
    fw.name = "append";
    fw.domain_kind = DatumKind::Text;
    for (const auto& s : seed_texts) fw.seeds.push_back(make_seed(Datum::text(s)));
    for (const auto& tag : tags) {
        fw.datamorphisms.push_back(unary("app_" + tag, [tag](const Datum& d) {
            return Datum::text(d.as_text() + tag);
        }));
    }
    return fw;
}

/// Brute-force closure: BFS over all application sequences until no new
/// datum appears. Returns the set of canonical ids.
inline std::set<CaseId> closure_oracle(const Framework& fw, std::size_t hard_cap = 100000) {
    std::set<CaseId> seen;
    std::deque<Datum> frontier;
    for (const auto& s : fw.seeds) {
        if (seen.insert(s.id).second) frontier.push_back(s.datum);
    }
    while (!frontier.empty() && seen.size() < hard_cap) {
        Datum d = frontier.front();
        frontier.pop_front();
        for (const auto& phi : fw.datamorphisms) {
            if (phi.arity != 1) continue;
            Datum out;
            try {
                out = apply_datamorphism(phi, std::span(&d, 1), phi.default_params());
            } catch (const InapplicableError&) {
                continue;
            }
            if (seen.insert(canonical_hash(out)).second) frontier.push_back(out);
        }
    }
    return seen;
}

/// Independent k-way coverage scanner: for each case, enumerates every
/// length-n subsequence of its lineage and collects the covered
/// composition-order tuples per seed.
inline double coverage_oracle(const Pool& pool, const Framework& fw, std::size_t n,
                              bool distinct_only = false) {
    std::vector<std::string> names;
    for (const auto& phi : fw.datamorphisms)
        if (phi.arity == 1) names.push_back(phi.name);

    if (n == 0) {
        if (fw.seeds.empty()) return 1.0;
        std::size_t present = 0;
        for (const auto& s : fw.seeds) present += pool.contains(s.id);
        return static_cast<double>(present) / fw.seeds.size();
    }

    // covered[seed] = set of tuples, each tuple joined in COMPOSITION order
    std::map<CaseId, std::set<std::vector<std::string>>> covered;
    for (const auto& c : pool.cases()) {
        const auto& steps = c.lineage.steps;
        std::vector<std::size_t> pick(n);
        // enumerate all index subsequences i1 < ... < in
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth,
                                                                std::size_t start) {
            if (depth == n) {
                std::vector<std::string> tuple;
                for (std::size_t j = n; j-- > 0;) tuple.push_back(steps[pick[j]].morphism);
                covered[c.lineage.seed_id].insert(std::move(tuple));
                return;
            }
            for (std::size_t i = start; i + (n - depth) <= steps.size(); ++i) {
                pick[depth] = i;
                rec(depth + 1, i + 1);
            }
        };
        if (steps.size() >= n) rec(0, 0);
    }

    // enumerate all target tuples
    std::vector<std::vector<std::string>> targets;
    std::vector<std::size_t> idx(n, 0);
    if (!names.empty()) {
        for (;;) {
            bool repeated = false;
            for (std::size_t i = 0; i < n && !repeated; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (idx[i] == idx[j]) {
                        repeated = true;
                        break;
                    }
            if (!(distinct_only && repeated)) {
                std::vector<std::string> t;
                for (std::size_t i : idx) t.push_back(names[i]);
                targets.push_back(std::move(t));
            }
            std::size_t pos = n;
            while (pos > 0) {
                if (++idx[pos - 1] < names.size()) break;
                idx[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
    }
    std::size_t total = targets.size() * fw.seeds.size();
    if (total == 0) return 1.0;
    std::size_t hit = 0;
    for (const auto& s : fw.seeds)
        for (const auto& t : targets)
            if (covered.count(s.id) && covered[s.id].count(t)) ++hit;
    return static_cast<double>(hit) / total;
}

/// Naive two-pass mean/stddev in extended precision.
struct RefStats {
    long double mean = 0, sample_stddev = 0;
};

inline RefStats reference_stats(const std::vector<double>& values) {
    RefStats r;
    if (values.empty()) return r;
    long double sum = 0;
    for (double v : values) sum += v;
    r.mean = sum / values.size();
    if (values.size() > 1) {
        long double ss = 0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.sample_stddev = std::sqrt(ss / (values.size() - 1));
    }
    return r;
}

/// Random small framework over the append domain, for coverage agreement
/// checks: <= 3 morphisms, <= 2 seeds.
inline Framework random_small_framework(std::mt19937_64& rng) {
    std::size_t n_morphs = 1 + rng() % 3;
    std::size_t n_seeds = 1 + rng() % 2;
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < n_morphs; ++i) tags.push_back(std::string(1, 'a' + char(i)));
    std::vector<std::string> seeds;
    for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back("seed" + std::to_string(i));
    return append_framework(tags, seeds);
}

/// Random pool built by arbitrary short application chains (depth <= 3).
inline Pool random_small_pool(const Framework& fw, std::mt19937_64& rng) {
    Pool pool;
    for (const auto& s : fw.seeds) pool.insert(s);
    std::size_t extra = rng() % 8;
    for (std::size_t i = 0; i < extra; ++i) {
        const TestCase& seed = fw.seeds[rng() % fw.seeds.size()];
        std::size_t depth = 1 + rng() % 3;
        Datum current = seed.datum;
        Lineage lineage = seed.lineage;
        for (std::size_t d = 0; d < depth; ++d) {
            const Datamorphism& phi = fw.datamorphisms[rng() % fw.datamorphisms.size()];
            current = apply_datamorphism(phi, std::span(&current, 1), {});
            lineage.steps.push_back(LineageStep{phi.name, phi.default_params(), {}});
        }
        pool.insert(make_mutant(current, lineage));
    }
    return pool;
}

}  // namespace morphtest::testing

#endif
