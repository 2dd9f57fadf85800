#include "morphtest/subjects.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace morphtest {

namespace {

bool number_close(const Datum& a, const Datum& b, double tolerance) {
    return a.is_number() && b.is_number() &&
           std::fabs(a.as_number() - b.as_number()) <= tolerance;
}

Datamorphism reflect_morphism() {
    Datamorphism phi;
    phi.name = "reflect";
    phi.arity = 1;
    phi.transform = [](std::span<const Datum> args, const MorphParams&) {
        return Datum::number(std::numbers::pi - args[0].as_number());
    };
    return phi;
}

}  // namespace

Framework sine_framework(std::size_t seed_count) {
    Framework fw;
    fw.name = "sine";
    fw.domain_kind = DatumKind::Number;
    for (std::size_t i = 0; i < seed_count; ++i) {
        double x = seed_count > 1
                       ? std::numbers::pi * static_cast<double>(i) / (seed_count - 1)
                       : 0.0;
        fw.seeds.push_back(make_seed(Datum::number(x)));
    }
    fw.datamorphisms.push_back(reflect_morphism());

    Metamorphism m;
    m.name = "sin_reflection";
    m.morphisms = {{"reflect", {}}};
    m.tolerance = 1e-9;
    m.relation = [](const Datum& base, std::span<const Datum> mutants, double tol) {
        return number_close(base, mutants[0], tol);
    };
    fw.metamorphisms.push_back(std::move(m));
    return fw;
}

Subject sine_correct_subject() {
    Subject s;
    s.name = "sine_correct";
    s.evaluate = [](const Datum& d) { return Datum::number(std::sin(d.as_number())); };
    return s;
}

Subject sine_faulty_subject() {
    Subject s;
    s.name = "sine_faulty";
    s.evaluate = [](const Datum& d) {
        double x = d.as_number();
        return Datum::number(std::sin(x) + 0.001 * x);
    };
    return s;
}

Subject threshold_classifier(double t) {
    Subject s;
    s.name = "classifier:" + std::to_string(t);
    s.evaluate = [t](const Datum& d) {
        return Datum::text(d.as_number() < t ? "A" : "B");
    };
    return s;
}

Datamorphism midpoint_morphism() {
    Datamorphism mid;
    mid.name = "mid";
    mid.arity = 2;
    mid.transform = [](std::span<const Datum> args, const MorphParams&) {
        return Datum::number((args[0].as_number() + args[1].as_number()) / 2.0);
    };
    return mid;
}

Framework classifier_framework(double lo, double hi) {
    Framework fw;
    fw.name = "classifier";
    fw.domain_kind = DatumKind::Number;
    fw.seeds.push_back(make_seed(Datum::number(lo)));
    fw.seeds.push_back(make_seed(Datum::number(hi)));
    fw.datamorphisms.push_back(midpoint_morphism());
    return fw;
}

namespace {

std::string identity_name(std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "id_%03zu", k);
    return buf;
}

/// First 8 digest bytes of the datum hash mapped to [0, 1).
double hash_uniform(const Datum& d) {
    CaseId hex = canonical_hash(d);
    std::uint64_t bits = 0;
    for (int i = 0; i < 16; ++i) {
        char c = hex[i];
        bits = (bits << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return static_cast<double>(bits) * 0x1p-64;
}

}  // namespace

std::pair<Subject, Framework> synthetic_recognizer(const SynthConfig& cfg) {
    // Reference attributes are dyadic rationals in [1, 1.5) so that the
    // perturbed-minus-reference difference is the same double for every
    // identity, keeping scores analytically predictable.
    auto references = std::make_shared<std::map<std::string, std::vector<double>>>();
    std::mt19937_64 rng(cfg.rng_seed);

    Framework fw;
    fw.name = "synth_recognizer";
    fw.domain_kind = DatumKind::Record;

    for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        std::vector<double> attrs(kSynthAttrCount);
        for (auto& a : attrs)
            a = 1.0 + static_cast<double>(rng() % (1u << 19)) * 0x1p-20;
        std::string id = identity_name(k);
        (*references)[id] = attrs;
        fw.seeds.push_back(make_seed(Datum::record(
            {{"id", Datum::text(id)}, {"attrs", Datum::num_vector(attrs)}})));
    }

    for (std::size_t i = 0; i < kSynthAttrCount; ++i) {
        Datamorphism phi;
        phi.name = "attr_" + std::to_string(i / 10) + std::to_string(i % 10);
        phi.arity = 1;
        phi.param_schema = {{"delta", DatumKind::Number, std::nullopt,
                             Datum::number(cfg.delta)}};
        phi.applicability = [](std::span<const Datum> args, const MorphParams&) {
            return args[0].is_record() && args[0].as_record().count("attrs") != 0;
        };
        phi.transform = [i](std::span<const Datum> args, const MorphParams& params) {
            RecordMap rec = args[0].as_record();
            std::vector<double> attrs = rec.at("attrs").as_num_vector();
            attrs.at(i) += params.at("delta").as_number();
            rec["attrs"] = Datum::num_vector(std::move(attrs));
            return Datum::record(std::move(rec));
        };
        fw.datamorphisms.push_back(std::move(phi));

        Metamorphism m;
        m.name = "similar_after_" + fw.datamorphisms.back().name;
        m.morphisms = {{fw.datamorphisms.back().name, {}}};
        m.tolerance = 0.0;
        double threshold = cfg.threshold;
        m.relation = [threshold](const Datum&, std::span<const Datum> mutants, double) {
            return mutants[0].is_number() && mutants[0].as_number() >= threshold;
        };
        fw.metamorphisms.push_back(std::move(m));
    }

    Subject subject;
    subject.name = "synth_recognizer";
    double error_fraction = cfg.error_fraction;
    subject.evaluate = [references, error_fraction](const Datum& d) {
        if (!d.is_record()) throw SubjectFailure("input is not a record");
        const auto& rec = d.as_record();
        auto id_it = rec.find("id");
        auto attrs_it = rec.find("attrs");
        if (id_it == rec.end() || attrs_it == rec.end())
            throw SubjectFailure("record lacks id/attrs");
        auto ref_it = references->find(id_it->second.as_text());
        if (ref_it == references->end())
            throw SubjectFailure("unknown identity " + id_it->second.as_text());

        const auto& attrs = attrs_it->second.as_num_vector();
        const auto& ref = ref_it->second;
        if (attrs.size() != ref.size())
            throw SubjectFailure("attribute vector has wrong length");

        double l1 = 0;
        bool perturbed = false;
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            l1 += std::fabs(attrs[i] - ref[i]);
            perturbed |= attrs[i] != ref[i];
        }
        // Unedited inputs always recognize; edited ones fail a deterministic
        // hash-selected fraction, modeling non-recognition.
        if (perturbed && error_fraction > 0 && hash_uniform(d) < error_fraction)
            throw SubjectFailure("not recognised");

        double score =
            100.0 * (1.0 - std::min(1.0, l1 / static_cast<double>(kSynthAttrCount)));
        // Scores are reported at fixed 6-decimal precision, like the integer
        // or two-decimal scores real recognition services return.
        return Datum::number(std::nearbyint(score * 1e6) / 1e6);
    };
    return {std::move(subject), std::move(fw)};
}

Subject subject_by_name(const std::string& name, const SynthConfig& synth) {
    if (name == "sine_correct") return sine_correct_subject();
    if (name == "sine_faulty") return sine_faulty_subject();
    if (name == "synth_recognizer") return synthetic_recognizer(synth).first;
    if (name.rfind("classifier:", 0) == 0) {
        double t = std::stod(name.substr(11));
        if (!std::isfinite(t)) throw std::invalid_argument("classifier threshold must be finite");
        return threshold_classifier(t);
    }
    throw std::invalid_argument("unknown subject '" + name +
                                "'; known: sine_correct, sine_faulty, "
                                "classifier:<t>, synth_recognizer");
}

Framework framework_by_name(const std::string& name, std::size_t sine_seeds,
                            const SynthConfig& synth) {
    if (name == "sine") return sine_framework(sine_seeds);
    if (name == "classifier") return classifier_framework();
    if (name == "synth_recognizer") return synthetic_recognizer(synth).second;
    throw std::invalid_argument("unknown framework '" + name +
                                "'; known: sine, classifier, synth_recognizer");
}

std::vector<std::string> list_subject_names() {
    return {"sine_correct", "sine_faulty", "classifier:<t>", "synth_recognizer"};
}

std::vector<std::string> list_framework_names() {
    return {"sine", "classifier", "synth_recognizer"};
}

}  // namespace morphtest
