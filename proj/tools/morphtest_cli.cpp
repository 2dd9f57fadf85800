// morphtest — datamorphic test generation, execution and analysis.
//
// The pipeline is file-mediated: `generate` writes a pool, `run` executes a
// subject over it into an execution-record file, `check` evaluates the
// metamorphisms into verdicts, `stats` builds the score table. `explore`
// runs boundary bisection and `coverage` measures k-way combinatorial
// coverage of an existing pool.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "morphtest/analytics.hpp"
#include "morphtest/io.hpp"
#include "morphtest/strategies.hpp"
#include "morphtest/subjects.hpp"

using nlohmann::json;
using namespace morphtest;

namespace {

constexpr int kExitStrictFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitLimit = 3;
constexpr int kExitSubjectStart = 4;
constexpr int kExitProtocol = 5;

struct GlobalOptions {
    std::string config_path;
    std::uint64_t rng_seed = 0;
    bool rng_seed_set = false;
    std::string out;
    std::string format = "csv";
    bool strict = false;
    int workers = 0;  // 0: unset, fall back to MORPHTEST_WORKERS, then 1

    json config;  // parsed --config file, or empty object

    int effective_workers() const {
        if (workers > 0) return workers;
        if (const char* env = std::getenv("MORPHTEST_WORKERS")) {
            int w = std::atoi(env);
            if (w > 0) return w;
        }
        return 1;
    }
};

json section(const json& cfg, const char* name) {
    return cfg.is_object() && cfg.contains(name) ? cfg[name] : json::object();
}

SynthConfig synth_config(const json& fw_section, const GlobalOptions& opts) {
    SynthConfig synth;
    json s = section(fw_section, "synth");
    synth.n_seeds = s.value("n_seeds", synth.n_seeds);
    synth.rng_seed = s.value("rng_seed", opts.rng_seed_set ? opts.rng_seed : synth.rng_seed);
    synth.delta = s.value("delta", synth.delta);
    synth.error_fraction = s.value("error_fraction", synth.error_fraction);
    synth.threshold = s.value("threshold", synth.threshold);
    return synth;
}

Framework resolve_framework(std::string name, const GlobalOptions& opts) {
    json fw_section = section(opts.config, "framework");
    if (name.empty()) {
        if (fw_section.is_string())
            name = fw_section.get<std::string>();
        else
            name = fw_section.value("name", "");
    }
    if (name.empty())
        throw std::invalid_argument("no framework given (use --framework or the config file)");
    std::size_t sine_seeds = fw_section.is_object() ? fw_section.value("sine_seeds", 20) : 20;
    Framework fw = framework_by_name(name, sine_seeds, synth_config(fw_section, opts));
    fw.validate();
    return fw;
}

GenLimits resolve_limits(const json& strategy_section) {
    GenLimits limits;
    limits.max_pool_size = strategy_section.value("max_pool_size", limits.max_pool_size);
    limits.max_depth = strategy_section.value("max_depth", limits.max_depth);
    if (strategy_section.contains("param_grid")) {
        for (const auto& [morph, grid] : strategy_section["param_grid"].items()) {
            std::vector<MorphParams> entries;
            for (const auto& p : grid) entries.push_back(params_from_json(p));
            limits.param_grid[morph] = std::move(entries);
        }
    }
    return limits;
}

Subject resolve_subject(const std::string& name, const std::vector<std::string>& command,
                        const GlobalOptions& opts, int timeout_ms, int max_restarts) {
    json sub_section = section(opts.config, "subject");
    if (!command.empty()) {
        Subject s;
        s.name = command[0];
        s.external = ExternalSettings{command, timeout_ms, max_restarts};
        return s;
    }
    if (!name.empty())
        return subject_by_name(name, synth_config(section(opts.config, "framework"), opts));
    if (sub_section.is_string())
        return subject_by_name(sub_section.get<std::string>(),
                               synth_config(section(opts.config, "framework"), opts));
    if (sub_section.is_object() && sub_section.contains("command")) {
        Subject s;
        ExternalSettings ext;
        ext.command = sub_section["command"].get<std::vector<std::string>>();
        ext.timeout_ms = sub_section.value("timeout_ms", ext.timeout_ms);
        ext.max_restarts = sub_section.value("max_restarts", ext.max_restarts);
        s.name = ext.command.at(0);
        s.external = std::move(ext);
        return s;
    }
    if (sub_section.is_object() && sub_section.contains("name"))
        return subject_by_name(sub_section["name"].get<std::string>(),
                               synth_config(section(opts.config, "framework"), opts));
    throw std::invalid_argument("no subject given (use --subject/--command or the config file)");
}

std::vector<double> read_vector_file(const std::string& path) {
    std::string text = read_text_file(path);
    std::vector<double> values;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw IoError(path + ": not a number: " + token);
        }
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t')
            flush();
        else
            token += c;
    }
    flush();
    return values;
}

std::optional<double> number_score(const Datum& d) {
    if (d.is_number()) return d.as_number();
    return std::nullopt;
}

void print_verdict_summary(const CheckResult& result) {
    std::size_t pass = 0, fail = 0, inapplicable = 0, error = 0;
    for (const auto& s : result.summaries) {
        std::cout << s.metamorphism << ": pass=" << s.passed << " fail=" << s.failed
                  << " inapplicable=" << s.inapplicable << " error=" << s.errored << "\n";
        pass += s.passed;
        fail += s.failed;
        inapplicable += s.inapplicable;
        error += s.errored;
    }
    std::cout << "Pass: " << pass << "\nFail: " << fail
              << "\nInapplicable: " << inapplicable << "\nError: " << error << "\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"datamorphic testing engine"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "run-configuration JSON file");
    auto* seed_opt = app.add_option("--seed", opts.rng_seed, "RNG seed (64-bit)");
    app.add_option("--out", opts.out, "output file path");
    app.add_option("--format", opts.format, "report format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--strict", opts.strict, "exit nonzero when any Fail verdict exists");
    app.add_option("--workers", opts.workers,
                   "worker slots for subject execution (env MORPHTEST_WORKERS)");

    std::string framework_name, strategy_name, subject_name, pool_path, records_path;
    std::vector<std::string> command;
    std::size_t kway_k = 1, random_count = 100;
    int timeout_ms = 5000, max_restarts = 3;

    auto* generate = app.add_subcommand("generate", "generate a test pool");
    generate->add_option("--framework", framework_name, "bundled framework name");
    generate->add_option("--strategy", strategy_name,
                         "exhaustive|kway|random|optimal");
    generate->add_option("--k", kway_k, "k for the kway strategy");
    generate->add_option("--count", random_count, "mutants for the random strategy");
    std::size_t ga_generations = 20, ga_population = 50;
    std::string ga_fitness = "max_numeric";
    generate->add_option("--generations", ga_generations, "GA generations");
    generate->add_option("--population-cap", ga_population, "GA population cap");
    generate->add_option("--fitness", ga_fitness, "GA fitness: max_numeric|diversity|violations");
    std::size_t max_pool_size = 0, max_depth = 0;
    generate->add_option("--max-pool-size", max_pool_size, "pool size limit");
    generate->add_option("--max-depth", max_depth, "lineage depth limit");
    bool distinct_only = false;
    generate->add_flag("--distinct-only", distinct_only,
                       "kway: exclude tuples with repeated datamorphisms");

    auto* run = app.add_subcommand("run", "execute a subject over a pool");
    run->add_option("--pool", pool_path, "pool file")->required();
    run->add_option("--subject", subject_name, "bundled subject name");
    run->add_option("--command", command, "external subject command line");
    run->add_option("--timeout-ms", timeout_ms, "external response timeout");
    run->add_option("--max-restarts", max_restarts, "external restart budget");

    auto* check = app.add_subcommand("check", "check metamorphisms against records");
    check->add_option("--pool", pool_path, "pool file")->required();
    check->add_option("--records", records_path, "execution record file")->required();
    check->add_option("--framework", framework_name, "bundled framework name");

    auto* coverage = app.add_subcommand("coverage", "measure k-way coverage of a pool");
    coverage->add_option("--pool", pool_path, "pool file")->required();
    coverage->add_option("--framework", framework_name, "bundled framework name");
    coverage->add_option("--k", kway_k, "maximum tuple length");
    coverage->add_flag("--distinct-only", distinct_only,
                       "exclude tuples with repeated datamorphisms");

    auto* stats = app.add_subcommand("stats", "score table and summary statistics");
    stats->add_option("--pool", pool_path, "pool file");
    stats->add_option("--records", records_path, "execution record file");
    std::vector<std::string> pearson_files;
    stats->add_option("--pearson", pearson_files,
                      "two vector files; print their Pearson correlation")
        ->expected(2);

    auto* explore = app.add_subcommand("explore", "bisect a classification boundary");
    explore->add_option("--subject", subject_name, "bundled subject name");
    double point_a = 0.0, point_b = 1.0, epsilon = 1e-6;
    std::size_t max_iterations = 64;
    explore->add_option("--a", point_a, "first endpoint");
    explore->add_option("--b", point_b, "second endpoint");
    explore->add_option("--epsilon", epsilon, "termination distance");
    explore->add_option("--max-iterations", max_iterations, "iteration cap");

    auto* subjects = app.add_subcommand("subjects", "list bundled subjects and frameworks");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    opts.rng_seed_set = seed_opt->count() > 0;

    if (!opts.config_path.empty()) {
        opts.config = read_json_file(opts.config_path);
        if (!opts.config.is_object())
            throw std::invalid_argument("config file must hold a JSON object");
        if (opts.config.value("version", 1) != 1)
            throw std::invalid_argument("unsupported config version");
        if (!opts.rng_seed_set && opts.config.contains("rng_seed")) {
            opts.rng_seed = opts.config["rng_seed"].get<std::uint64_t>();
            opts.rng_seed_set = true;
        }
        if (opts.out.empty()) opts.out = opts.config.value("out", "");
    }

    if (subjects->parsed()) {
        std::cout << "subjects:\n";
        for (const auto& s : list_subject_names()) std::cout << "  " << s << "\n";
        std::cout << "frameworks:\n";
        for (const auto& f : list_framework_names()) std::cout << "  " << f << "\n";
        return 0;
    }

    if (generate->parsed()) {
        json strat_section = section(opts.config, "strategy");
        if (strategy_name.empty()) strategy_name = strat_section.value("name", "");
        if (generate->count("--k") == 0) kway_k = strat_section.value("k", kway_k);
        if (generate->count("--count") == 0)
            random_count = strat_section.value("count", random_count);
        if (max_pool_size > 0) strat_section["max_pool_size"] = max_pool_size;
        if (max_depth > 0) strat_section["max_depth"] = max_depth;
        GenLimits limits = resolve_limits(strat_section);

        Framework fw = resolve_framework(framework_name, opts);

        Pool pool;
        json echo{{"strategy", strategy_name},
                  {"max_pool_size", limits.max_pool_size},
                  {"max_depth", limits.max_depth}};
        if (strategy_name == "exhaustive") {
            pool = generate_exhaustive(fw, limits);
        } else if (strategy_name == "kway") {
            pool = generate_kway(fw, kway_k, limits, {distinct_only});
            echo["k"] = kway_k;
            echo["distinct_only"] = distinct_only;
        } else if (strategy_name == "random") {
            pool = generate_random(fw, random_count, opts.rng_seed, limits);
            echo["count"] = random_count;
            echo["rng_seed"] = opts.rng_seed;
        } else if (strategy_name == "optimal") {
            GaConfig ga;
            json ga_section = section(strat_section, "ga");
            ga.population_cap = generate->count("--population-cap")
                                    ? ga_population
                                    : ga_section.value("population_cap", ga_population);
            ga.generations = generate->count("--generations")
                                 ? ga_generations
                                 : ga_section.value("generations", ga_generations);
            ga.tournament_size = ga_section.value("tournament_size", ga.tournament_size);
            ga.elitism_count = ga_section.value("elitism_count", ga.elitism_count);
            ga.fitness = generate->count("--fitness")
                             ? ga_fitness
                             : ga_section.value("fitness", ga_fitness);
            ga.rng_seed = opts.rng_seed;
            Subject subject;
            if (ga.fitness == "violations") {
                subject = resolve_subject(subject_name, {}, opts, timeout_ms, max_restarts);
                ga.subject = &subject;
            }
            GaResult result = generate_optimal(fw, ga, limits);
            pool = std::move(result.pool);
            echo["ga"] = {{"population_cap", ga.population_cap},
                          {"generations", ga.generations},
                          {"fitness", ga.fitness},
                          {"rng_seed", ga.rng_seed}};
            echo["best_trace"] = result.best_trace;
        } else {
            throw std::invalid_argument("unknown strategy '" + strategy_name +
                                        "'; valid: exhaustive, kway, random, optimal");
        }

        std::string out = opts.out.empty() ? "pool.json" : opts.out;
        write_text_file(out, pool_to_json(pool, fw.name, strategy_name, echo).dump(2) + "\n");
        std::cout << "pool: " << pool.size() << " cases"
                  << (pool.truncated() ? " (truncated)" : "") << " -> " << out << "\n";
        if (strategy_name == "kway") {
            auto report = measure_kway_coverage(pool, fw, kway_k, {distinct_only});
            for (std::size_t n = 0; n < report.per_n.size(); ++n)
                std::cout << "coverage " << n << "-way: " << report.per_n[n] << "\n";
        }
        return 0;
    }

    if (run->parsed()) {
        Pool pool = pool_from_json(read_json_file(pool_path));
        Subject subject = resolve_subject(subject_name, command, opts, timeout_ms, max_restarts);
        auto records = execute_pool(subject, pool, opts.effective_workers());
        std::string out = opts.out.empty() ? "records.json" : opts.out;
        write_text_file(out, records_to_json(records, subject.name).dump(2) + "\n");
        std::size_t ok = 0;
        for (const auto& r : records) ok += r.ok();
        std::cout << "executed " << records.size() << " cases, " << ok << " outputs -> "
                  << out << "\n";
        return 0;
    }

    if (check->parsed()) {
        Framework fw = resolve_framework(framework_name, opts);
        Pool pool = pool_from_json(read_json_file(pool_path));
        auto records = index_records(records_from_json(read_json_file(records_path)));
        CheckResult result = check_metamorphisms(fw, pool, records);
        std::string out = opts.out.empty() ? "verdicts.json" : opts.out;
        write_text_file(out, check_result_to_json(result).dump(2) + "\n");
        print_verdict_summary(result);
        if (opts.strict && result.total_failed() > 0) return kExitStrictFail;
        return 0;
    }

    if (coverage->parsed()) {
        Framework fw = resolve_framework(framework_name, opts);
        Pool pool = pool_from_json(read_json_file(pool_path));
        auto report = measure_kway_coverage(pool, fw, kway_k, {distinct_only});
        for (std::size_t n = 0; n < report.per_n.size(); ++n)
            std::cout << "coverage " << n << "-way: " << report.per_n[n] << "\n";
        std::cout << "aggregate: " << report.aggregate << "\n";
        return 0;
    }

    if (stats->parsed()) {
        if (!pearson_files.empty()) {
            auto x = read_vector_file(pearson_files[0]);
            auto y = read_vector_file(pearson_files[1]);
            std::cout << format_double(pearson(x, y)) << "\n";
            return 0;
        }
        if (pool_path.empty() || records_path.empty())
            throw std::invalid_argument("stats needs --pool and --records (or --pearson)");
        Pool pool = pool_from_json(read_json_file(pool_path));
        auto records = index_records(records_from_json(read_json_file(records_path)));
        MetricTable table = build_metric_table(pool, records, number_score);
        TableSummary summary = summarize(table);

        std::string out = opts.out.empty()
                              ? (opts.format == "csv" ? "stats.csv" : "stats.json")
                              : opts.out;
        if (opts.format == "csv") {
            write_text_file(out, emit_csv(table, summary));
        } else {
            json meta{{"pool", pool_path},
                      {"records", records_path},
                      {"generated_at", static_cast<long>(std::time(nullptr))}};
            write_text_file(out, emit_json(table, summary, nullptr, meta).dump(2) + "\n");
        }
        if (summary.overall.defined)
            std::cout << "overall mean " << format_double(summary.overall.mean)
                      << " stddev " << format_double(summary.overall.stddev)
                      << " not-recognised " << summary.overall.missing << "\n";
        std::cout << "table " << table.row_ids.size() << "x" << table.column_ids.size()
                  << " -> " << out << "\n";
        return 0;
    }

    if (explore->parsed()) {
        Subject subject = resolve_subject(subject_name, command, opts, timeout_ms, max_restarts);
        ExploreConfig cfg;
        cfg.epsilon = epsilon;
        cfg.max_iterations = max_iterations;
        Datamorphism mid = midpoint_morphism();
        auto result = explore_boundary(subject, Datum::number(point_a),
                                       Datum::number(point_b), mid, cfg);
        std::cout << "lo " << format_double(result.lo.as_number()) << "\nhi "
                  << format_double(result.hi.as_number()) << "\niterations "
                  << result.iterations << "\n";
        if (!opts.out.empty()) {
            Pool trace;
            for (const auto& c : result.trace) trace.insert(c);
            write_text_file(opts.out,
                            pool_to_json(trace, subject.name, "explore",
                                         json{{"epsilon", epsilon}})
                                    .dump(2) +
                                "\n");
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ProtocolViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const SubjectUnavailable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSubjectStart;
    } catch (const LimitExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLimit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
