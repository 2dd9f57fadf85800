#ifndef MORPHTEST_SESSION_HPP
#define MORPHTEST_SESSION_HPP

#include <map>
#include <memory>

#include "morphtest/runner.hpp"

namespace morphtest {

class ExternalProcess;

/// One live connection to a subject. In-process subjects are called directly;
/// external subjects are spoken to over the line-delimited JSON protocol and
/// restarted after crashes or timeouts up to the configured max_restarts.
class SubjectSession {
  public:
    explicit SubjectSession(const Subject& subject);
    ~SubjectSession();

    SubjectSession(const SubjectSession&) = delete;
    SubjectSession& operator=(const SubjectSession&) = delete;

    ExecutionRecord evaluate(const CaseId& id, const Datum& input);

  private:
    ExecutionRecord evaluate_external(const CaseId& id, const Datum& input);
    void ensure_process();

    const Subject& subject_;
    std::unique_ptr<ExternalProcess> process_;
    int restarts_used_ = 0;
    bool gave_up_ = false;
    std::size_t lines_seen_ = 0;  // cumulative subject stdout line count
    std::map<CaseId, ExecutionRecord> out_of_order_;
};

}  // namespace morphtest

#endif
