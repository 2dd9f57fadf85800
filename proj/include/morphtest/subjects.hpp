#ifndef MORPHTEST_SUBJECTS_HPP
#define MORPHTEST_SUBJECTS_HPP

#include <cstdint>
#include <utility>

#include "morphtest/framework.hpp"
#include "morphtest/runner.hpp"

namespace morphtest {

/// Sine test framework: Number domain, seeds on a uniform grid over [0, pi],
/// the reflection datamorphism x -> pi - x and the metamorphism
/// |P(x) - P(pi - x)| <= tolerance.
Framework sine_framework(std::size_t seed_count = 20);

Subject sine_correct_subject();
/// sin(x) + 0.001x: violates the reflection metamorphism everywhere except
/// the fixed point x = pi/2.
Subject sine_faulty_subject();

/// Classifies a number into "A" (x < t) or "B" (x >= t); the boundary point
/// itself belongs to the upper class.
Subject threshold_classifier(double t);

/// Binary midpoint datamorphism Mid(x, y) = (x + y) / 2.
Datamorphism midpoint_morphism();

/// Number-domain framework bundling the midpoint morphism for exploratory
/// runs; seeds are the interval endpoints.
Framework classifier_framework(double lo = 0.0, double hi = 1.0);

struct SynthConfig {
    std::size_t n_seeds = 200;
    std::uint64_t rng_seed = 42;
    double delta = 0.1;           // per-operator attribute shift
    double error_fraction = 0.0;  // fraction of mutants failing recognition
    double threshold = 80.0;      // similarity the metamorphisms require
};

/// Synthetic recognizer: Record{id: Text, attrs: NumVector(13)} domain with
/// 13 single-attribute perturbation datamorphisms and a similarity subject
/// scoring 100 * (1 - L1(attrs, reference) / 13), rounded to 6 decimals.
/// A configurable fraction of perturbed inputs fails recognition, selected
/// deterministically by datum hash; unperturbed seeds always recognize.
std::pair<Subject, Framework> synthetic_recognizer(const SynthConfig& cfg = {});

constexpr std::size_t kSynthAttrCount = 13;

/// Resolves a stable CLI subject identifier: sine_correct, sine_faulty,
/// classifier:<t>, synth_recognizer. Throws std::invalid_argument on unknown
/// names.
Subject subject_by_name(const std::string& name, const SynthConfig& synth = {});

/// Bundled framework names: sine, classifier, synth_recognizer.
Framework framework_by_name(const std::string& name, std::size_t sine_seeds = 20,
                            const SynthConfig& synth = {});

std::vector<std::string> list_subject_names();
std::vector<std::string> list_framework_names();

}  // namespace morphtest

#endif
