#ifndef MORPHTEST_IO_HPP
#define MORPHTEST_IO_HPP

#include <string>

#include <json.hpp>

#include "morphtest/framework.hpp"
#include "morphtest/runner.hpp"

namespace morphtest {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Tagged JSON form shared by the wire protocol and all report files:
/// {"num": x} | {"text": s} | {"bits": "0101"} | {"vec": [..]} | {"rec": {..}}
nlohmann::json datum_to_json(const Datum& d);
Datum datum_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const MorphParams& p);
MorphParams params_from_json(const nlohmann::json& j);

nlohmann::json lineage_to_json(const Lineage& l);
Lineage lineage_from_json(const nlohmann::json& j);

/// Pool file: header (framework, strategy, config echo, truncated) plus one
/// record per case with the datum in base64 canonical form.
nlohmann::json pool_to_json(const Pool& pool, const std::string& framework,
                            const std::string& strategy,
                            const nlohmann::json& config_echo);
Pool pool_from_json(const nlohmann::json& j);

nlohmann::json records_to_json(const std::vector<ExecutionRecord>& records,
                               const std::string& subject);
std::vector<ExecutionRecord> records_from_json(const nlohmann::json& j);

nlohmann::json check_result_to_json(const CheckResult& result);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace morphtest

#endif
