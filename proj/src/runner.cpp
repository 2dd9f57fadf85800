#include "morphtest/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "morphtest/io.hpp"
#include "morphtest/session.hpp"

namespace morphtest {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inapplicable: return "inapplicable";
        case Verdict::Error: return "error";
    }
    return "?";
}

std::size_t CheckResult::total_failed() const {
    std::size_t n = 0;
    for (const auto& s : summaries) n += s.failed;
    return n;
}

// ---------------------------------------------------------------------------
// External subject process

class ExternalProcess {
  public:
    explicit ExternalProcess(const ExternalSettings& settings) {
        int to_child[2], from_child[2], exec_report[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0 || pipe(exec_report) != 0)
            throw SubjectUnavailable("pipe() failed");
        fcntl(exec_report[1], F_SETFD, FD_CLOEXEC);

        pid_ = fork();
        if (pid_ < 0) throw SubjectUnavailable("fork() failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            close(exec_report[0]);
            std::vector<char*> argv;
            for (const auto& arg : settings.command)
                argv.push_back(const_cast<char*>(arg.c_str()));
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            int err = errno;
            [[maybe_unused]] auto n = write(exec_report[1], &err, sizeof(err));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        close(exec_report[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];

        int err = 0;
        if (read(exec_report[0], &err, sizeof(err)) == sizeof(err)) {
            close(exec_report[0]);
            kill_and_reap();
            throw SubjectUnavailable("cannot start subject '" + settings.command[0] +
                                     "': " + std::strerror(err));
        }
        close(exec_report[0]);
    }

    ~ExternalProcess() { kill_and_reap(); }

    bool send_line(const std::string& line) {
        std::string payload = line + "\n";
        std::size_t off = 0;
        while (off < payload.size()) {
            ssize_t n = write(stdin_fd_, payload.data() + off, payload.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;  // broken pipe: the subject died
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    enum class ReadStatus { Line, Eof, Timeout };

    /// Reads the next newline-terminated line from the subject, waiting at
    /// most until the deadline.
    ReadStatus read_line(std::string& line, std::chrono::steady_clock::time_point deadline) {
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return ReadStatus::Line;
            }
            auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (remaining.count() <= 0) return ReadStatus::Timeout;
            pollfd pfd{stdout_fd_, POLLIN, 0};
            int rc = poll(&pfd, 1, static_cast<int>(remaining.count()));
            if (rc == 0) return ReadStatus::Timeout;
            if (rc < 0) {
                if (errno == EINTR) continue;
                return ReadStatus::Eof;
            }
            char chunk[4096];
            ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
            if (n <= 0) return ReadStatus::Eof;
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void kill_and_reap() {
        if (pid_ > 0) {
            kill(pid_, SIGKILL);
            waitpid(pid_, nullptr, 0);
            pid_ = -1;
        }
        if (stdin_fd_ >= 0) close(stdin_fd_);
        if (stdout_fd_ >= 0) close(stdout_fd_);
        stdin_fd_ = stdout_fd_ = -1;
    }

  private:
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
};

// ---------------------------------------------------------------------------
// SubjectSession

SubjectSession::SubjectSession(const Subject& subject) : subject_(subject) {
    if (subject_.is_external())
        process_ = std::make_unique<ExternalProcess>(*subject_.external);
    else if (!subject_.evaluate)
        throw SubjectUnavailable("subject '" + subject_.name + "' has no evaluator");
}

SubjectSession::~SubjectSession() = default;

void SubjectSession::ensure_process() {
    if (process_) return;
    if (restarts_used_ >= subject_.external->max_restarts) {
        gave_up_ = true;
        return;
    }
    ++restarts_used_;
    process_ = std::make_unique<ExternalProcess>(*subject_.external);
}

ExecutionRecord SubjectSession::evaluate(const CaseId& id, const Datum& input) {
    ExecutionRecord rec;
    rec.case_id = id;
    if (!subject_.is_external()) {
        try {
            rec.output = subject_.evaluate(input);
        } catch (const std::exception& e) {
            rec.kind = OutcomeKind::SubjectError;
            rec.message = e.what();
        }
        return rec;
    }
    return evaluate_external(id, input);
}

ExecutionRecord SubjectSession::evaluate_external(const CaseId& id, const Datum& input) {
    ExecutionRecord rec;
    rec.case_id = id;

    if (auto it = out_of_order_.find(id); it != out_of_order_.end()) {
        rec = it->second;
        out_of_order_.erase(it);
        return rec;
    }

    ensure_process();
    if (gave_up_ || !process_) {
        rec.kind = OutcomeKind::SubjectError;
        rec.message = "subject no longer running (restart budget exhausted)";
        return rec;
    }

    nlohmann::json request{{"id", id}, {"input", datum_to_json(input)}};
    if (!process_->send_line(request.dump())) {
        process_.reset();
        rec.kind = OutcomeKind::SubjectError;
        rec.message = "subject closed its input";
        return rec;
    }

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(subject_.external->timeout_ms);
    for (;;) {
        std::string line;
        auto status = process_->read_line(line, deadline);
        if (status == ExternalProcess::ReadStatus::Timeout) {
            process_->kill_and_reap();
            process_.reset();
            rec.kind = OutcomeKind::Timeout;
            rec.message = "no response within " +
                          std::to_string(subject_.external->timeout_ms) + " ms";
            return rec;
        }
        if (status == ExternalProcess::ReadStatus::Eof) {
            process_.reset();
            rec.kind = OutcomeKind::SubjectError;
            rec.message = "subject exited before responding";
            return rec;
        }

        ++lines_seen_;
        nlohmann::json response;
        try {
            response = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProtocolViolation(lines_seen_, std::string("not valid JSON: ") + e.what());
        }
        if (!response.is_object() || !response.contains("id") ||
            !response["id"].is_string())
            throw ProtocolViolation(lines_seen_, "response lacks a string 'id' field");
        bool has_output = response.contains("output");
        bool has_error = response.contains("error") && response["error"].is_string();
        if (has_output == has_error)
            throw ProtocolViolation(lines_seen_,
                                    "response must carry exactly one of 'output'/'error'");

        ExecutionRecord parsed;
        parsed.case_id = response["id"].get<std::string>();
        if (has_output) {
            try {
                parsed.output = datum_from_json(response["output"]);
            } catch (const IoError& e) {
                throw ProtocolViolation(lines_seen_, std::string("bad output datum: ") + e.what());
            }
        } else {
            parsed.kind = OutcomeKind::SubjectError;
            parsed.message = response["error"].get<std::string>();
        }

        if (parsed.case_id == id) return parsed;
        // Responses may arrive out of order; keep this one for its request.
        out_of_order_[parsed.case_id] = std::move(parsed);
    }
}

// ---------------------------------------------------------------------------

std::vector<ExecutionRecord> execute_pool(const Subject& subject, const Pool& pool,
                                          int workers) {
    const auto& cases = pool.cases();
    std::vector<ExecutionRecord> records(cases.size());

    if (!subject.is_external() && workers > 1) {
        std::vector<std::thread> threads;
        std::size_t per = (cases.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            std::size_t begin = static_cast<std::size_t>(w) * per;
            std::size_t end = std::min(begin + per, cases.size());
            if (begin >= end) break;
            threads.emplace_back([&, begin, end] {
                SubjectSession session(subject);
                for (std::size_t i = begin; i < end; ++i)
                    records[i] = session.evaluate(cases[i].id, cases[i].datum);
            });
        }
        for (auto& t : threads) t.join();
        return records;
    }

    SubjectSession session(subject);
    for (std::size_t i = 0; i < cases.size(); ++i)
        records[i] = session.evaluate(cases[i].id, cases[i].datum);
    return records;
}

ExecutionMap index_records(const std::vector<ExecutionRecord>& records) {
    ExecutionMap map;
    for (const auto& r : records) map[r.case_id] = r;
    return map;
}

namespace {

/// Stable key for a lineage: seed id plus one (name, params hash) per step.
std::string lineage_key(const Lineage& l) {
    std::string key = l.seed_id;
    for (const auto& step : l.steps) {
        key += '|';
        key += step.morphism;
        key += ':';
        key += canonical_hash(Datum::record(step.params));
        for (const auto& arg : step.extra_args) {
            key += ',';
            key += arg;
        }
    }
    return key;
}

}  // namespace

CheckResult check_metamorphisms(const Framework& fw, const Pool& pool,
                                const ExecutionMap& records) {
    std::unordered_map<std::string, const TestCase*> by_lineage;
    for (const auto& c : pool.cases()) by_lineage.emplace(lineage_key(c.lineage), &c);

    auto record_for = [&records](const CaseId& id) -> const ExecutionRecord& {
        auto it = records.find(id);
        if (it == records.end())
            throw std::runtime_error("execution records do not cover case " + id);
        return it->second;
    };

    CheckResult result;
    for (const auto& m : fw.metamorphisms) {
        VerdictSummary summary;
        summary.metamorphism = m.name;

        // Resolve declared params once so lineage matching sees the same
        // fully-defaulted assignments the strategies stored.
        std::vector<LineageStep> declared;
        for (const auto& [mname, params] : m.morphisms) {
            const Datamorphism* phi = fw.find_morphism(mname);
            if (!phi) throw std::runtime_error("metamorphism " + m.name +
                                               " references unknown morphism " + mname);
            declared.push_back(LineageStep{mname, phi->resolve_params(params), {}});
        }

        for (const auto& base : pool.cases()) {
            VerdictRecord v;
            v.metamorphism = m.name;
            v.base_id = base.id;

            std::vector<const TestCase*> mutants;
            Lineage extended = base.lineage;
            for (const auto& step : declared) {
                extended.steps.push_back(step);
                auto it = by_lineage.find(lineage_key(extended));
                if (it == by_lineage.end()) break;
                mutants.push_back(it->second);
            }

            if (mutants.size() != declared.size()) {
                v.outcome = Verdict::Inapplicable;
                ++summary.inapplicable;
                result.verdicts.push_back(std::move(v));
                continue;
            }
            for (const auto* mu : mutants) v.mutant_ids.push_back(mu->id);

            const ExecutionRecord& base_rec = record_for(base.id);
            bool errored = !base_rec.ok();
            std::vector<Datum> mutant_outs;
            for (const auto* mu : mutants) {
                const ExecutionRecord& r = record_for(mu->id);
                if (!r.ok()) {
                    errored = true;
                    break;
                }
                mutant_outs.push_back(r.output);
            }

            if (errored) {
                v.outcome = Verdict::Error;
                ++summary.errored;
            } else if (m.relation(base_rec.output, mutant_outs, m.tolerance)) {
                v.outcome = Verdict::Pass;
                ++summary.passed;
            } else {
                v.outcome = Verdict::Fail;
                ++summary.failed;
            }
            result.verdicts.push_back(std::move(v));
        }
        result.summaries.push_back(summary);
    }
    return result;
}

}  // namespace morphtest
