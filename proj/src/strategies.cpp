#include "morphtest/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>

#include "morphtest/session.hpp"

namespace morphtest {

namespace {

std::vector<const Datamorphism*> unary_morphisms(const Framework& fw) {
    std::vector<const Datamorphism*> out;
    for (const auto& phi : fw.datamorphisms)
        if (phi.arity == 1) out.push_back(&phi);
    return out;
}

Lineage extend(const Lineage& parent, const Datamorphism& phi, MorphParams params) {
    Lineage l = parent;
    l.steps.push_back(LineageStep{phi.name, std::move(params), {}});
    return l;
}

/// True when `tuple` (composition order, leftmost applied last) is embedded
/// in the case's application-ordered steps as a subsequence.
bool lineage_embeds(const Lineage& lineage, std::span<const std::string> tuple) {
    std::size_t next = tuple.size();  // matches tuple back-to-front
    for (const auto& step : lineage.steps) {
        if (next == 0) break;
        if (step.morphism == tuple[next - 1]) --next;
    }
    return next == 0;
}

/// Enumerates ordered n-tuples over `names` in lexicographic index order,
/// optionally skipping tuples with repeated entries.
class TupleIter {
  public:
    TupleIter(const std::vector<std::string>& names, std::size_t n, bool distinct_only)
        : names_(names), idx_(n, 0), distinct_only_(distinct_only) {
        done_ = names.empty() && n > 0;
        if (!done_ && distinct_only_ && n > 0 && repeated()) advance();
    }

    bool done() const { return done_; }

    std::vector<std::string> current() const {
        std::vector<std::string> t;
        t.reserve(idx_.size());
        for (std::size_t i : idx_) t.push_back(names_[i]);
        return t;
    }

    void advance() {
        do {
            std::size_t pos = idx_.size();
            while (pos > 0) {
                if (++idx_[pos - 1] < names_.size()) break;
                idx_[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) {
                done_ = true;
                return;
            }
        } while (distinct_only_ && repeated());
    }

  private:
    bool repeated() const {
        for (std::size_t i = 0; i < idx_.size(); ++i)
            for (std::size_t j = i + 1; j < idx_.size(); ++j)
                if (idx_[i] == idx_[j]) return true;
        return false;
    }

    const std::vector<std::string>& names_;
    std::vector<std::size_t> idx_;
    bool distinct_only_;
    bool done_ = false;
};

std::size_t count_tuples(std::size_t alphabet, std::size_t n, bool distinct_only) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i)
        total *= distinct_only ? (alphabet > i ? alphabet - i : 0) : alphabet;
    return total;
}

}  // namespace

std::vector<MorphParams> GenLimits::grid_for(const Datamorphism& phi) const {
    auto it = param_grid.find(phi.name);
    if (it != param_grid.end() && !it->second.empty()) {
        std::vector<MorphParams> resolved;
        resolved.reserve(it->second.size());
        for (const auto& p : it->second) resolved.push_back(phi.resolve_params(p));
        return resolved;
    }
    return {phi.default_params()};
}

double default_distance(const Datum& a, const Datum& b) {
    if (a.is_number() && b.is_number()) return std::fabs(a.as_number() - b.as_number());
    if (a.is_num_vector() && b.is_num_vector()) {
        const auto& x = a.as_num_vector();
        const auto& y = b.as_num_vector();
        std::size_t n = std::max(x.size(), y.size());
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = (i < x.size() ? x[i] : 0.0) - (i < y.size() ? y[i] : 0.0);
            sum += d * d;
        }
        return std::sqrt(sum);
    }
    // Fall back to discrete distance for non-numeric datums.
    return a == b ? 0.0 : 1.0;
}

Pool generate_exhaustive(const Framework& fw, const GenLimits& limits) {
    Pool pool;
    for (const auto& s : fw.seeds) pool.insert(s);

    auto morphs = unary_morphisms(fw);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        // pool grows while we iterate; cases() stays insertion-ordered
        const TestCase parent = pool.cases()[i];
        for (const auto* phi : morphs) {
            for (const auto& params : limits.grid_for(*phi)) {
                Datum out;
                try {
                    out = apply_datamorphism(*phi, std::span(&parent.datum, 1), params);
                } catch (const InapplicableError&) {
                    continue;
                }
                CaseId id = canonical_hash(out);
                if (pool.contains(id)) continue;
                if (parent.lineage.steps.size() + 1 > limits.max_depth) {
                    pool.mark_truncated();
                    continue;
                }
                if (pool.size() >= limits.max_pool_size) {
                    pool.mark_truncated();
                    return pool;
                }
                pool.insert(make_mutant(out, extend(parent.lineage, *phi, params)));
            }
        }
    }
    return pool;
}

Pool generate_kway(const Framework& fw, std::size_t k, const GenLimits& limits,
                   const KwayOptions& opts) {
    for (const auto& phi : fw.datamorphisms)
        if (phi.arity != 1)
            std::cerr << "warning: kway ignores non-unary datamorphism '" << phi.name
                      << "'\n";

    Pool pool;
    for (const auto& s : fw.seeds) pool.insert(s);
    if (pool.size() > limits.max_pool_size)
        throw LimitExceeded("kway: seeds alone exceed max_pool_size");

    auto morphs = unary_morphisms(fw);
    std::vector<std::string> names;
    for (const auto* phi : morphs) names.push_back(phi->name);

    for (std::size_t n = 1; n <= k; ++n) {
        for (const auto& seed : fw.seeds) {
            for (TupleIter it(names, n, opts.distinct_only); !it.done(); it.advance()) {
                auto tuple = it.current();
                bool covered = false;
                for (const auto& c : pool.cases()) {
                    if (c.lineage.seed_id == seed.id && lineage_embeds(c.lineage, tuple)) {
                        covered = true;
                        break;
                    }
                }
                if (covered) continue;

                // Compose the tuple directly onto the seed; the rightmost
                // morphism applies first. Intermediates are kept so that
                // metamorphism chains resolve.
                Datum current = seed.datum;
                Lineage lineage = seed.lineage;
                bool applicable = true;
                for (auto name_it = tuple.rbegin(); name_it != tuple.rend(); ++name_it) {
                    const Datamorphism* phi = fw.find_morphism(*name_it);
                    MorphParams params = limits.grid_for(*phi).front();
                    try {
                        current = apply_datamorphism(*phi, std::span(&current, 1), params);
                    } catch (const InapplicableError&) {
                        applicable = false;
                        break;
                    }
                    lineage = extend(lineage, *phi, params);
                    if (!pool.contains(canonical_hash(current)) &&
                        pool.size() >= limits.max_pool_size)
                        throw LimitExceeded("kway: required cases exceed max_pool_size");
                    pool.insert(make_mutant(current, lineage));
                }
                (void)applicable;  // an inapplicable chain leaves the tuple uncovered
            }
        }
    }
    return pool;
}

CoverageReport measure_kway_coverage(const Pool& pool, const Framework& fw,
                                     std::size_t k, const KwayOptions& opts) {
    CoverageReport report;
    report.per_n.resize(k + 1, 1.0);

    if (!fw.seeds.empty()) {
        std::size_t present = 0;
        for (const auto& s : fw.seeds)
            if (pool.contains(s.id)) ++present;
        report.per_n[0] = static_cast<double>(present) / fw.seeds.size();
    }

    auto morphs = unary_morphisms(fw);
    std::vector<std::string> names;
    for (const auto* phi : morphs) names.push_back(phi->name);

    for (std::size_t n = 1; n <= k; ++n) {
        std::size_t per_seed = count_tuples(names.size(), n, opts.distinct_only);
        std::size_t total = per_seed * fw.seeds.size();
        if (total == 0) {
            report.per_n[n] = 1.0;  // vacuously complete
            continue;
        }
        std::size_t covered = 0;
        for (const auto& seed : fw.seeds) {
            for (TupleIter it(names, n, opts.distinct_only); !it.done(); it.advance()) {
                auto tuple = it.current();
                for (const auto& c : pool.cases()) {
                    if (c.lineage.seed_id == seed.id && lineage_embeds(c.lineage, tuple)) {
                        ++covered;
                        break;
                    }
                }
            }
        }
        report.per_n[n] = static_cast<double>(covered) / total;
    }
    report.aggregate = *std::min_element(report.per_n.begin(), report.per_n.end());
    return report;
}

Pool generate_random(const Framework& fw, std::size_t count, std::uint64_t rng_seed,
                     const GenLimits& limits) {
    Pool pool;
    for (const auto& s : fw.seeds) pool.insert(s);

    auto morphs = unary_morphisms(fw);
    if (count == 0) return pool;
    if (morphs.empty() || fw.seeds.empty()) {
        pool.mark_truncated();
        return pool;
    }

    // Index picks use modulo reduction on the raw engine output so pools are
    // reproducible across standard library implementations.
    std::mt19937_64 rng(rng_seed);
    auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    std::size_t inserted = 0;
    std::size_t consecutive_misses = 0;
    const std::size_t budget = 50 * count;
    while (inserted < count) {
        if (consecutive_misses >= budget) {
            pool.mark_truncated();
            break;
        }
        if (pool.size() >= limits.max_pool_size) {
            pool.mark_truncated();
            break;
        }
        const TestCase& parent = pool.cases()[pick(pool.size())];
        const Datamorphism& phi = *morphs[pick(morphs.size())];
        auto grid = limits.grid_for(phi);
        const MorphParams& params = grid[pick(grid.size())];

        if (parent.lineage.steps.size() + 1 > limits.max_depth) {
            ++consecutive_misses;
            continue;
        }
        Datum out;
        try {
            out = apply_datamorphism(phi, std::span(&parent.datum, 1), params);
        } catch (const InapplicableError&) {
            ++consecutive_misses;
            continue;
        }
        if (pool.insert(make_mutant(out, extend(parent.lineage, phi, params)))) {
            ++inserted;
            consecutive_misses = 0;
        } else {
            ++consecutive_misses;
        }
    }
    return pool;
}

namespace {

double fitness_max_numeric(const TestCase& c) {
    if (c.datum.is_number()) return c.datum.as_number();
    if (c.datum.is_num_vector()) {
        double sum = 0;
        for (double x : c.datum.as_num_vector()) sum += x * x;
        return std::sqrt(sum);
    }
    return -std::numeric_limits<double>::infinity();
}

std::vector<double> evaluate_fitness(const std::string& name,
                                     const std::vector<TestCase>& population,
                                     const Framework& fw, const Subject* subject) {
    std::vector<double> fit(population.size(), 0.0);
    if (name == "max_numeric") {
        for (std::size_t i = 0; i < population.size(); ++i)
            fit[i] = fitness_max_numeric(population[i]);
    } else if (name == "diversity") {
        for (std::size_t i = 0; i < population.size(); ++i) {
            double sum = 0;
            for (std::size_t j = 0; j < population.size(); ++j)
                if (i != j) sum += default_distance(population[i].datum, population[j].datum);
            fit[i] = population.size() > 1 ? sum / (population.size() - 1) : 0.0;
        }
    } else if (name == "violations") {
        if (!subject || subject->is_external() || !subject->evaluate)
            throw UnknownFitness("fitness 'violations' needs an in-process subject");
        for (std::size_t i = 0; i < population.size(); ++i) {
            std::size_t violations = 0;
            for (const auto& m : fw.metamorphisms) {
                try {
                    Datum base_out = subject->evaluate(population[i].datum);
                    std::vector<Datum> mutant_outs;
                    Datum current = population[i].datum;
                    for (const auto& [mname, params] : m.morphisms) {
                        const Datamorphism* phi = fw.find_morphism(mname);
                        current = apply_datamorphism(*phi, std::span(&current, 1), params);
                        mutant_outs.push_back(subject->evaluate(current));
                    }
                    if (!m.relation(base_out, mutant_outs, m.tolerance)) ++violations;
                } catch (const InapplicableError&) {
                } catch (const SubjectFailure&) {
                }
            }
            fit[i] = static_cast<double>(violations);
        }
    } else {
        throw UnknownFitness("unknown fitness '" + name + "'");
    }
    return fit;
}

}  // namespace

GaResult generate_optimal(const Framework& fw, const GaConfig& cfg,
                          const GenLimits& limits) {
    if (cfg.elitism_count > cfg.population_cap)
        throw std::invalid_argument("elitism_count exceeds population_cap");

    std::vector<TestCase> population;
    {
        Pool dedup;
        for (const auto& s : fw.seeds)
            if (dedup.insert(s)) population.push_back(s);
    }
    auto morphs = unary_morphisms(fw);
    std::mt19937_64 rng(cfg.rng_seed);
    auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    GaResult result;
    auto fit = evaluate_fitness(cfg.fitness, population, fw, cfg.subject);
    result.best_trace.push_back(*std::max_element(fit.begin(), fit.end()));

    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<std::size_t> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&fit](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

        std::vector<TestCase> next;
        std::unordered_map<CaseId, bool> in_next;
        std::size_t elites = std::min(cfg.elitism_count, population.size());
        for (std::size_t i = 0; i < elites; ++i) {
            next.push_back(population[order[i]]);
            in_next.emplace(next.back().id, true);
        }

        std::size_t attempts = 0;
        const std::size_t max_attempts = 50 * std::max<std::size_t>(cfg.population_cap, 1);
        while (next.size() < cfg.population_cap && attempts < max_attempts &&
               !morphs.empty()) {
            ++attempts;
            // tournament selection over the previous generation
            std::size_t winner = pick(population.size());
            for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
                std::size_t rival = pick(population.size());
                if (fit[rival] > fit[winner]) winner = rival;
            }
            const TestCase& parent = population[winner];
            if (parent.lineage.steps.size() + 1 > limits.max_depth) continue;
            const Datamorphism& phi = *morphs[pick(morphs.size())];
            auto grid = limits.grid_for(phi);
            const MorphParams& params = grid[pick(grid.size())];
            Datum out;
            try {
                out = apply_datamorphism(phi, std::span(&parent.datum, 1), params);
            } catch (const InapplicableError&) {
                continue;
            }
            TestCase child = make_mutant(out, extend(parent.lineage, phi, params));
            if (in_next.count(child.id)) continue;
            in_next.emplace(child.id, true);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        fit = evaluate_fitness(cfg.fitness, population, fw, cfg.subject);
        result.best_trace.push_back(*std::max_element(fit.begin(), fit.end()));
    }

    for (auto& c : population) result.pool.insert(std::move(c));
    for (const auto& s : fw.seeds) result.pool.insert(s);
    return result;
}

ExploreResult explore_boundary(const Subject& subject, const Datum& a, const Datum& b,
                               const Datamorphism& mid, const ExploreConfig& cfg) {
    if (mid.arity != 2)
        throw std::invalid_argument("explore_boundary needs a binary datamorphism");
    auto distance = cfg.distance ? cfg.distance : default_distance;

    SubjectSession session(subject);
    auto classify = [&session](const Datum& d) {
        ExecutionRecord rec = session.evaluate(canonical_hash(d), d);
        if (!rec.ok()) throw SubjectFailure("subject failed during exploration: " + rec.message);
        return canonical_hash(rec.output);
    };

    Datum lo = a, hi = b;
    CaseId class_lo = classify(lo);
    CaseId class_hi = classify(hi);
    if (class_lo == class_hi)
        throw SameClass("both endpoints are classified identically");

    ExploreResult result;
    result.trace.push_back(make_seed(lo));
    result.trace.push_back(make_seed(hi));

    while (distance(lo, hi) > cfg.epsilon) {
        if (result.iterations >= cfg.max_iterations)
            throw NoConvergence("max iterations reached before distance <= epsilon");
        std::vector<Datum> args{lo, hi};
        Datum mid_point = apply_datamorphism(mid, args, {});
        {
            Lineage l;
            l.seed_id = canonical_hash(lo);
            l.steps.push_back(LineageStep{mid.name, {}, {canonical_hash(hi)}});
            result.trace.push_back(make_mutant(mid_point, std::move(l)));
        }
        CaseId class_mid = classify(mid_point);
        if (class_mid != class_lo)
            hi = mid_point;  // boundary lies in [lo, mid]
        else
            lo = mid_point;  // classes of lo and mid agree; move the lo side
        ++result.iterations;
    }

    // Order numerically when possible so callers get a proper interval.
    if (lo.is_number() && hi.is_number() && hi.as_number() < lo.as_number())
        std::swap(lo, hi);
    result.lo = std::move(lo);
    result.hi = std::move(hi);
    return result;
}

}  // namespace morphtest
