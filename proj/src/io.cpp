#include "morphtest/io.hpp"

#include <fstream>
#include <sstream>

namespace morphtest {

namespace {
const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3f]);
        out.push_back(i + 1 < bytes.size() ? kB64Alphabet[(chunk >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < bytes.size() ? kB64Alphabet[chunk & 0x3f] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t chunk = 0;
    int have = 0;
    for (char c : text) {
        if (c == '=') break;
        int v = value_of(c);
        if (v < 0) throw IoError("invalid base64 character");
        chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
        if (++have == 4) {
            out.push_back(static_cast<std::uint8_t>(chunk >> 16));
            out.push_back(static_cast<std::uint8_t>(chunk >> 8));
            out.push_back(static_cast<std::uint8_t>(chunk));
            chunk = 0;
            have = 0;
        }
    }
    if (have == 2) {
        out.push_back(static_cast<std::uint8_t>(chunk >> 4));
    } else if (have == 3) {
        out.push_back(static_cast<std::uint8_t>(chunk >> 10));
        out.push_back(static_cast<std::uint8_t>(chunk >> 2));
    } else if (have != 0) {
        throw IoError("truncated base64 input");
    }
    return out;
}

nlohmann::json datum_to_json(const Datum& d) {
    switch (d.kind()) {
        case DatumKind::Number:
            return {{"num", d.as_number()}};
        case DatumKind::Text:
            return {{"text", d.as_text()}};
        case DatumKind::Bits: {
            std::string s;
            for (bool b : d.as_bits().bits) s.push_back(b ? '1' : '0');
            return {{"bits", s}};
        }
        case DatumKind::NumVector:
            return {{"vec", d.as_num_vector()}};
        case DatumKind::Record: {
            nlohmann::json rec = nlohmann::json::object();
            for (const auto& [k, v] : d.as_record()) rec[k] = datum_to_json(v);
            return {{"rec", rec}};
        }
    }
    throw IoError("unreachable datum kind");
}

Datum datum_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != 1)
        throw IoError("datum must be a single-key tagged object");
    if (j.contains("num")) {
        if (!j["num"].is_number()) throw IoError("'num' must be a number");
        return Datum::number(j["num"].get<double>());
    }
    if (j.contains("text")) {
        if (!j["text"].is_string()) throw IoError("'text' must be a string");
        return Datum::text(j["text"].get<std::string>());
    }
    if (j.contains("bits")) {
        if (!j["bits"].is_string()) throw IoError("'bits' must be a string of 0/1");
        std::vector<bool> bits;
        for (char c : j["bits"].get<std::string>()) {
            if (c != '0' && c != '1') throw IoError("'bits' must contain only 0/1");
            bits.push_back(c == '1');
        }
        return Datum::bits(std::move(bits));
    }
    if (j.contains("vec")) {
        if (!j["vec"].is_array()) throw IoError("'vec' must be an array");
        return Datum::num_vector(j["vec"].get<std::vector<double>>());
    }
    if (j.contains("rec")) {
        if (!j["rec"].is_object()) throw IoError("'rec' must be an object");
        RecordMap rec;
        for (const auto& [k, v] : j["rec"].items()) rec.emplace(k, datum_from_json(v));
        return Datum::record(std::move(rec));
    }
    throw IoError("unknown datum tag in JSON");
}

nlohmann::json params_to_json(const MorphParams& p) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : p) out[k] = datum_to_json(v);
    return out;
}

MorphParams params_from_json(const nlohmann::json& j) {
    MorphParams p;
    for (const auto& [k, v] : j.items()) p.emplace(k, datum_from_json(v));
    return p;
}

nlohmann::json lineage_to_json(const Lineage& l) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : l.steps) {
        nlohmann::json step{{"morphism", s.morphism}, {"params", params_to_json(s.params)}};
        if (!s.extra_args.empty()) step["args"] = s.extra_args;
        steps.push_back(std::move(step));
    }
    return {{"seed", l.seed_id}, {"steps", steps}};
}

Lineage lineage_from_json(const nlohmann::json& j) {
    Lineage l;
    l.seed_id = j.at("seed").get<std::string>();
    for (const auto& step : j.at("steps")) {
        LineageStep s;
        s.morphism = step.at("morphism").get<std::string>();
        s.params = params_from_json(step.at("params"));
        if (step.contains("args")) s.extra_args = step["args"].get<std::vector<CaseId>>();
        l.steps.push_back(std::move(s));
    }
    return l;
}

nlohmann::json pool_to_json(const Pool& pool, const std::string& framework,
                            const std::string& strategy,
                            const nlohmann::json& config_echo) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : pool.cases()) {
        cases.push_back({{"id", c.id},
                         {"datum", base64_encode(c.datum.canonical_bytes())},
                         {"lineage", lineage_to_json(c.lineage)}});
    }
    return {{"version", 1},
            {"framework", framework},
            {"strategy", strategy},
            {"config", config_echo},
            {"truncated", pool.truncated()},
            {"cases", cases}};
}

Pool pool_from_json(const nlohmann::json& j) {
    Pool pool;
    for (const auto& c : j.at("cases")) {
        Datum d = Datum::from_canonical_bytes(base64_decode(c.at("datum").get<std::string>()));
        TestCase tc = make_mutant(d, lineage_from_json(c.at("lineage")));
        if (tc.id != c.at("id").get<std::string>())
            throw IoError("pool file corrupt: stored id does not match datum hash");
        pool.insert(std::move(tc));
    }
    if (j.value("truncated", false)) pool.mark_truncated();
    return pool;
}

nlohmann::json records_to_json(const std::vector<ExecutionRecord>& records,
                               const std::string& subject) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json entry{{"case_id", r.case_id}};
        switch (r.kind) {
            case OutcomeKind::Output:
                entry["outcome"] = "output";
                entry["output"] = datum_to_json(r.output);
                break;
            case OutcomeKind::SubjectError:
                entry["outcome"] = "error";
                entry["message"] = r.message;
                break;
            case OutcomeKind::Timeout:
                entry["outcome"] = "timeout";
                entry["message"] = r.message;
                break;
        }
        out.push_back(std::move(entry));
    }
    return {{"version", 1}, {"subject", subject}, {"records", out}};
}

std::vector<ExecutionRecord> records_from_json(const nlohmann::json& j) {
    std::vector<ExecutionRecord> records;
    for (const auto& entry : j.at("records")) {
        ExecutionRecord r;
        r.case_id = entry.at("case_id").get<std::string>();
        std::string outcome = entry.at("outcome").get<std::string>();
        if (outcome == "output") {
            r.kind = OutcomeKind::Output;
            r.output = datum_from_json(entry.at("output"));
        } else if (outcome == "error") {
            r.kind = OutcomeKind::SubjectError;
            r.message = entry.value("message", "");
        } else if (outcome == "timeout") {
            r.kind = OutcomeKind::Timeout;
            r.message = entry.value("message", "");
        } else {
            throw IoError("unknown outcome '" + outcome + "'");
        }
        records.push_back(std::move(r));
    }
    return records;
}

nlohmann::json check_result_to_json(const CheckResult& result) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : result.verdicts) {
        verdicts.push_back({{"metamorphism", v.metamorphism},
                            {"base", v.base_id},
                            {"mutants", v.mutant_ids},
                            {"outcome", to_string(v.outcome)}});
    }
    nlohmann::json summaries = nlohmann::json::array();
    for (const auto& s : result.summaries) {
        summaries.push_back({{"metamorphism", s.metamorphism},
                             {"pass", s.passed},
                             {"fail", s.failed},
                             {"inapplicable", s.inapplicable},
                             {"error", s.errored}});
    }
    return {{"version", 1}, {"verdicts", verdicts}, {"summary", summaries}};
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << contents;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace morphtest
