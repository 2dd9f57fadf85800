#include "morphtest/datum.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace morphtest {

const char* to_string(DatumKind k) {
    switch (k) {
        case DatumKind::Number: return "number";
        case DatumKind::Text: return "text";
        case DatumKind::Bits: return "bits";
        case DatumKind::NumVector: return "num_vector";
        case DatumKind::Record: return "record";
    }
    return "?";
}

Datum::Datum(RecordMap rec)
    : value_(std::make_shared<const RecordMap>(std::move(rec))) {}

bool Datum::is_record() const {
    return std::holds_alternative<std::shared_ptr<const RecordMap>>(value_);
}

const RecordMap& Datum::as_record() const {
    return *std::get<std::shared_ptr<const RecordMap>>(value_);
}

DatumKind Datum::kind() const {
    switch (value_.index()) {
        case 0: return DatumKind::Number;
        case 1: return DatumKind::Text;
        case 2: return DatumKind::Bits;
        case 3: return DatumKind::NumVector;
        default: return DatumKind::Record;
    }
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    std::uint8_t byte() {
        if (pos >= buf.size()) throw std::runtime_error("canonical form truncated");
        return buf[pos++];
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | byte();
        return v;
    }
    double f64() {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits = (bits << 8) | byte();
        return std::bit_cast<double>(bits);
    }
    std::string bytes(std::uint32_t n) {
        std::string s;
        s.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) s.push_back(static_cast<char>(byte()));
        return s;
    }
};

Datum read_datum(Reader& r) {
    switch (r.byte()) {
        case 0:
            return Datum::number(r.f64());
        case 1: {
            std::uint32_t n = r.u32();
            return Datum::text(r.bytes(n));
        }
        case 2: {
            std::uint32_t n = r.u32();
            std::vector<bool> bits(n);
            std::uint8_t cur = 0;
            for (std::uint32_t i = 0; i < n; ++i) {
                if (i % 8 == 0) cur = r.byte();
                bits[i] = (cur >> (7 - i % 8)) & 1;
            }
            return Datum::bits(std::move(bits));
        }
        case 3: {
            std::uint32_t n = r.u32();
            std::vector<double> v(n);
            for (auto& x : v) x = r.f64();
            return Datum::num_vector(std::move(v));
        }
        case 4: {
            std::uint32_t n = r.u32();
            RecordMap rec;
            for (std::uint32_t i = 0; i < n; ++i) {
                std::uint32_t klen = r.u32();
                std::string key = r.bytes(klen);
                rec.emplace(std::move(key), read_datum(r));
            }
            return Datum::record(std::move(rec));
        }
        default:
            throw std::runtime_error("unknown datum tag");
    }
}

void write_datum(std::vector<std::uint8_t>& out, const Datum& d) {
    switch (d.kind()) {
        case DatumKind::Number:
            out.push_back(0);
            put_f64(out, d.as_number());
            break;
        case DatumKind::Text: {
            out.push_back(1);
            const auto& s = d.as_text();
            put_u32(out, static_cast<std::uint32_t>(s.size()));
            out.insert(out.end(), s.begin(), s.end());
            break;
        }
        case DatumKind::Bits: {
            out.push_back(2);
            const auto& b = d.as_bits().bits;
            put_u32(out, static_cast<std::uint32_t>(b.size()));
            std::uint8_t cur = 0;
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (b[i]) cur |= static_cast<std::uint8_t>(1u << (7 - i % 8));
                if (i % 8 == 7) {
                    out.push_back(cur);
                    cur = 0;
                }
            }
            if (b.size() % 8 != 0) out.push_back(cur);
            break;
        }
        case DatumKind::NumVector: {
            out.push_back(3);
            const auto& v = d.as_num_vector();
            put_u32(out, static_cast<std::uint32_t>(v.size()));
            for (double x : v) put_f64(out, x);
            break;
        }
        case DatumKind::Record: {
            out.push_back(4);
            const auto& rec = d.as_record();
            put_u32(out, static_cast<std::uint32_t>(rec.size()));
            // std::map iterates keys in bytewise ascending order already.
            for (const auto& [key, value] : rec) {
                put_u32(out, static_cast<std::uint32_t>(key.size()));
                out.insert(out.end(), key.begin(), key.end());
                write_datum(out, value);
            }
            break;
        }
    }
}

}  // namespace

std::vector<std::uint8_t> Datum::canonical_bytes() const {
    std::vector<std::uint8_t> out;
    write_datum(out, *this);
    return out;
}

Datum Datum::from_canonical_bytes(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    Datum d = read_datum(r);
    if (r.pos != bytes.size())
        throw std::runtime_error("trailing bytes after canonical form");
    return d;
}

CaseId canonical_hash(const Datum& d) {
    auto bytes = d.canonical_bytes();
    std::array<unsigned char, 32> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                   nullptr) != 1 || len != 32)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string id(64, '0');
    for (std::size_t i = 0; i < 32; ++i) {
        id[2 * i] = hex[digest[i] >> 4];
        id[2 * i + 1] = hex[digest[i] & 0xf];
    }
    return id;
}

std::string to_display_string(const Datum& d) {
    std::ostringstream os;
    switch (d.kind()) {
        case DatumKind::Number:
            os << d.as_number();
            break;
        case DatumKind::Text:
            os << '"' << d.as_text() << '"';
            break;
        case DatumKind::Bits:
            for (bool b : d.as_bits().bits) os << (b ? '1' : '0');
            break;
        case DatumKind::NumVector: {
            os << '[';
            const auto& v = d.as_num_vector();
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) os << ", ";
                os << v[i];
            }
            os << ']';
            break;
        }
        case DatumKind::Record: {
            os << '{';
            bool first = true;
            for (const auto& [k, v] : d.as_record()) {
                if (!first) os << ", ";
                first = false;
                os << k << ": " << to_display_string(v);
            }
            os << '}';
            break;
        }
    }
    return os.str();
}

}  // namespace morphtest
