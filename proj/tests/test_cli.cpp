#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("morphtest_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
    std::string log = dir.file("cli_output_" + std::to_string(TempDir::counter()++) + ".log");
    std::string cmd = std::string(MORPHTEST_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("cli: unknown strategy exits with the config error code and names it") {
    TempDir dir;
    auto r = run_cli(dir, "generate --framework sine --strategy bogus --out " +
                              dir.file("pool.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("bogus") != std::string::npos);
    CHECK(r.output.find("exhaustive") != std::string::npos);  // lists the valid ones
}

TEST_CASE("cli: missing subcommand and unknown subject are config errors") {
    TempDir dir;
    CHECK(run_cli(dir, "").exit_code != 0);
    auto r = run_cli(dir, "generate --framework nope --strategy exhaustive --out " +
                              dir.file("pool.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("nope") != std::string::npos);
}

TEST_CASE("cli: kway generation over the synthetic framework reports the full pool") {
    TempDir dir;
    std::string pool = dir.file("pool.json");
    auto r = run_cli(dir,
                     "generate --framework synth_recognizer --strategy kway --k 1 --out " +
                         pool);
    REQUIRE(r.exit_code == 0);
    // 200 seeds + 200 * 13 single-step mutants
    CHECK(r.output.find("pool: 2800 cases") != std::string::npos);
    CHECK(r.output.find("coverage 1-way: 1") != std::string::npos);
    CHECK(fs::exists(pool));
}

TEST_CASE("cli: full pipeline and the strict flag") {
    TempDir dir;
    std::string pool = dir.file("pool.json");
    std::string records = dir.file("records.json");
    std::string verdicts = dir.file("verdicts.json");

    std::string cfg = dir.file("config.json");
    write_file(cfg, R"({"framework": {"name": "sine", "sine_seeds": 40}})");

    REQUIRE(run_cli(dir, "--config " + cfg +
                             " generate --strategy exhaustive --out " + pool)
                .exit_code == 0);
    REQUIRE(run_cli(dir, "run --pool " + pool + " --subject sine_correct --out " + records)
                .exit_code == 0);
    auto ok = run_cli(dir, "--config " + cfg + " --strict --out " + verdicts +
                               " check --pool " + pool + " --records " + records);
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("Fail: 0") != std::string::npos);

    // the faulty subject violates the reflection relation everywhere but pi/2
    REQUIRE(run_cli(dir, "run --pool " + pool + " --subject sine_faulty --out " + records)
                .exit_code == 0);
    auto bad = run_cli(dir, "--config " + cfg + " --strict --out " + verdicts +
                                " check --pool " + pool + " --records " + records);
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("Fail: 0") == std::string::npos);
    // without --strict the same failing check exits zero
    CHECK(run_cli(dir, "--config " + cfg + " --out " + verdicts + " check --pool " + pool +
                           " --records " + records)
              .exit_code == 0);
}

TEST_CASE("cli: stats writes a CSV table with the footer rows") {
    TempDir dir;
    std::string pool = dir.file("pool.json");
    std::string records = dir.file("records.json");
    std::string csv = dir.file("stats.csv");
    std::string cfg = dir.file("config.json");
    write_file(cfg, R"({"framework": {"name": "synth_recognizer",
                                      "synth": {"n_seeds": 10, "delta": 0.13}}})");

    REQUIRE(run_cli(dir, "--config " + cfg + " generate --strategy kway --k 1 --out " + pool)
                .exit_code == 0);
    REQUIRE(run_cli(dir, "--config " + cfg + " run --pool " + pool +
                             " --subject synth_recognizer --out " + records)
                .exit_code == 0);
    auto r = run_cli(dir, "stats --pool " + pool + " --records " + records + " --out " + csv);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("overall mean 99 stddev 0") != std::string::npos);
    CHECK(r.output.find("table 10x13") != std::string::npos);

    std::string table = slurp(csv);
    CHECK(table.find("Average") != std::string::npos);
    CHECK(table.find("NotRecognised") != std::string::npos);
}

TEST_CASE("cli: pearson over vector files") {
    TempDir dir;
    write_file(dir.file("x.txt"), "99.70, 94.75, 93.03, 80.32\n");
    write_file(dir.file("y.txt"), "96.38, 84.50, 86.81, 63.57\n");
    auto r = run_cli(dir, "stats --pearson " + dir.file("x.txt") + " " + dir.file("y.txt"));
    REQUIRE(r.exit_code == 0);
    double value = std::stod(r.output);
    CHECK(value >= 0.975);
    CHECK(value <= 1.0);
}

TEST_CASE("cli: repeated seeded runs write byte-identical pool files") {
    TempDir dir;
    for (const std::string strategy :
         {std::string("random --count 60"), std::string("optimal --generations 8")}) {
        std::string a = dir.file("a.json"), b = dir.file("b.json");
        std::string args =
            "--seed 7 generate --framework synth_recognizer --strategy " + strategy;
        REQUIRE(run_cli(dir, args + " --out " + a).exit_code == 0);
        REQUIRE(run_cli(dir, args + " --out " + b).exit_code == 0);
        CHECK(slurp(a) == slurp(b));
        // a different seed must change the random pool
        if (strategy.rfind("random", 0) == 0) {
            std::string c = dir.file("c.json");
            REQUIRE(run_cli(dir, "--seed 8 generate --framework synth_recognizer "
                                 "--strategy " +
                                     strategy + " --out " + c)
                        .exit_code == 0);
            CHECK(slurp(a) != slurp(c));
        }
    }
}

TEST_CASE("cli: external subject over the wire protocol") {
    TempDir dir;
    std::string pool = dir.file("pool.json");
    std::string records = dir.file("records.json");
    REQUIRE(run_cli(dir, "generate --framework sine --strategy exhaustive --out " + pool)
                .exit_code == 0);

    auto ok = run_cli(dir, "run --pool " + pool + " --command " +
                               std::string(ECHO_SUBJECT_PATH) + " --out " + records);
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("executed") != std::string::npos);
    CHECK(ok.output.find(" 0 outputs") == std::string::npos);

    // a malformed response line aborts the run with the protocol exit code
    auto bad = run_cli(dir, "run --pool " + pool + " --command " +
                                std::string(ECHO_SUBJECT_PATH) +
                                " --command --malformed-at --command 5 --out " + records);
    CHECK(bad.exit_code == 5);
    CHECK(bad.output.find("line 5") != std::string::npos);

    // an unstartable command has its own exit code
    auto missing = run_cli(dir, "run --pool " + pool +
                                    " --command /nonexistent/subject --out " + records);
    CHECK(missing.exit_code == 4);
}

TEST_CASE("cli: explore bisects the classifier boundary") {
    TempDir dir;
    auto r = run_cli(dir, "explore --subject classifier:0.5 --a 0 --b 1 --epsilon 1e-6");
    REQUIRE(r.exit_code == 0);
    std::istringstream in(r.output);
    std::string label;
    double lo = 0, hi = 0;
    std::size_t iterations = 0;
    in >> label >> lo;
    REQUIRE(label == "lo");
    in >> label >> hi;
    REQUIRE(label == "hi");
    in >> label >> iterations;
    REQUIRE(label == "iterations");
    CHECK(hi - lo <= 1e-6);
    CHECK(lo <= 0.5);
    CHECK(hi >= 0.5);
    CHECK(iterations <= 20);
}

TEST_CASE("cli: subjects lists the bundled names") {
    TempDir dir;
    auto r = run_cli(dir, "subjects");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("sine_correct") != std::string::npos);
    CHECK(r.output.find("synth_recognizer") != std::string::npos);
    CHECK(r.output.find("frameworks:") != std::string::npos);
}
