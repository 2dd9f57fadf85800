#include "morphtest/framework.hpp"

#include <algorithm>

namespace morphtest {

MorphParams Datamorphism::default_params() const {
    MorphParams p;
    for (const auto& spec : param_schema) p.emplace(spec.name, spec.default_value);
    return p;
}

MorphParams Datamorphism::resolve_params(const MorphParams& given) const {
    MorphParams resolved = default_params();
    for (const auto& [key, value] : given) {
        auto it = std::find_if(param_schema.begin(), param_schema.end(),
                               [&](const ParamSpec& s) { return s.name == key; });
        if (it == param_schema.end())
            throw SchemaViolation(name + ": unknown parameter '" + key + "'");
        if (value.kind() != it->kind)
            throw SchemaViolation(name + ": parameter '" + key + "' expects " +
                                  to_string(it->kind) + ", got " +
                                  to_string(value.kind()));
        if (it->range && value.is_number()) {
            double x = value.as_number();
            if (x < it->range->first || x > it->range->second)
                throw SchemaViolation(name + ": parameter '" + key +
                                      "' out of range");
        }
        resolved[key] = value;
    }
    return resolved;
}

TestCase make_seed(const Datum& d) {
    TestCase c;
    c.id = canonical_hash(d);
    c.datum = d;
    c.lineage.seed_id = c.id;
    return c;
}

TestCase make_mutant(const Datum& d, Lineage lineage) {
    TestCase c;
    c.id = canonical_hash(d);
    c.datum = d;
    c.lineage = std::move(lineage);
    return c;
}

const Datamorphism* Framework::find_morphism(const std::string& mname) const {
    for (const auto& phi : datamorphisms)
        if (phi.name == mname) return &phi;
    return nullptr;
}

void Framework::validate() const {
    std::unordered_map<CaseId, bool> seen;
    for (const auto& s : seeds) {
        if (!s.lineage.is_seed())
            throw std::runtime_error(name + ": seed with non-empty lineage");
        if (s.datum.kind() != domain_kind)
            throw std::runtime_error(name + ": seed does not conform to domain kind");
        if (!seen.emplace(s.id, true).second)
            throw std::runtime_error(name + ": duplicate seed " + s.id);
    }
    std::unordered_map<std::string, int> arities;
    for (const auto& phi : datamorphisms) {
        if (!arities.emplace(phi.name, phi.arity).second)
            throw std::runtime_error(name + ": duplicate datamorphism " + phi.name);
        if (phi.arity < 0)
            throw std::runtime_error(name + ": negative arity on " + phi.name);
    }
    for (const auto& m : metamorphisms) {
        if (m.morphisms.empty())
            throw std::runtime_error(name + ": metamorphism " + m.name +
                                     " has no datamorphisms");
        for (const auto& [mname, params] : m.morphisms) {
            auto it = arities.find(mname);
            if (it == arities.end())
                throw std::runtime_error(name + ": metamorphism " + m.name +
                                         " references unknown datamorphism " + mname);
            if (it->second != 1)
                throw std::runtime_error(name + ": metamorphism " + m.name +
                                         " references non-unary datamorphism " + mname);
        }
        if (m.tolerance < 0)
            throw std::runtime_error(name + ": negative tolerance on " + m.name);
    }
}

bool Pool::insert(TestCase c) {
    auto [it, fresh] = index_.emplace(c.id, cases_.size());
    if (!fresh) return false;
    cases_.push_back(std::move(c));
    return true;
}

const TestCase* Pool::find(const CaseId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &cases_[it->second];
}

Datum apply_datamorphism(const Datamorphism& phi, std::span<const Datum> args,
                         const MorphParams& params) {
    if (static_cast<int>(args.size()) != phi.arity)
        throw SchemaViolation(phi.name + ": expected " + std::to_string(phi.arity) +
                              " arguments, got " + std::to_string(args.size()));
    MorphParams resolved = phi.resolve_params(params);
    if (phi.applicability && !phi.applicability(args, resolved))
        throw InapplicableError(phi.name + ": applicability condition not met");
    return phi.transform(args, resolved);
}

Datum replay_lineage(const Framework& fw, const Pool& pool, const TestCase& c) {
    const TestCase* seed = pool.find(c.lineage.seed_id);
    if (!seed) throw std::runtime_error("replay: seed not in pool: " + c.lineage.seed_id);
    Datum current = seed->datum;
    for (const auto& step : c.lineage.steps) {
        const Datamorphism* phi = fw.find_morphism(step.morphism);
        if (!phi) throw std::runtime_error("replay: unknown datamorphism " + step.morphism);
        std::vector<Datum> args;
        args.push_back(current);
        for (const auto& extra : step.extra_args) {
            const TestCase* arg = pool.find(extra);
            if (!arg) throw std::runtime_error("replay: missing argument case " + extra);
            args.push_back(arg->datum);
        }
        current = apply_datamorphism(*phi, args, step.params);
    }
    return current;
}

}  // namespace morphtest
