#ifndef MORPHTEST_DATUM_HPP
#define MORPHTEST_DATUM_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace morphtest {

class Datum;

enum class DatumKind { Number, Text, Bits, NumVector, Record };

const char* to_string(DatumKind k);

/// Fixed-width bit vector. Bit i is stored MSB-first within bytes when
/// serialized, so two vectors with the same bits and width are byte-equal.
struct BitVec {
    std::vector<bool> bits;

    std::size_t width() const { return bits.size(); }
    bool operator==(const BitVec&) const = default;
};

using RecordMap = std::map<std::string, Datum>;

/// A tagged value over the closed set of five datum kinds. Immutable by
/// convention: strategies and subjects always build new datums.
class Datum {
  public:
    Datum() : value_(0.0) {}
    explicit Datum(double n) : value_(n) {}
    explicit Datum(std::string text) : value_(std::move(text)) {}
    explicit Datum(BitVec bits) : value_(std::move(bits)) {}
    explicit Datum(std::vector<double> vec) : value_(std::move(vec)) {}
    explicit Datum(RecordMap rec);

    static Datum number(double n) { return Datum(n); }
    static Datum text(std::string s) { return Datum(std::move(s)); }
    static Datum bits(std::vector<bool> b) { return Datum(BitVec{std::move(b)}); }
    static Datum num_vector(std::vector<double> v) { return Datum(std::move(v)); }
    static Datum record(RecordMap r) { return Datum(std::move(r)); }

    DatumKind kind() const;

    bool is_number() const { return std::holds_alternative<double>(value_); }
    bool is_text() const { return std::holds_alternative<std::string>(value_); }
    bool is_bits() const { return std::holds_alternative<BitVec>(value_); }
    bool is_num_vector() const { return std::holds_alternative<std::vector<double>>(value_); }
    bool is_record() const;

    double as_number() const { return std::get<double>(value_); }
    const std::string& as_text() const { return std::get<std::string>(value_); }
    const BitVec& as_bits() const { return std::get<BitVec>(value_); }
    const std::vector<double>& as_num_vector() const { return std::get<std::vector<double>>(value_); }
    const RecordMap& as_record() const;

    /// Length-prefixed tagged binary form; total and injective on distinct
    /// values. Number payloads are the raw IEEE-754 bit pattern, so equality
    /// here is bit-level, not epsilon-based.
    std::vector<std::uint8_t> canonical_bytes() const;

    bool operator==(const Datum& other) const {
        return canonical_bytes() == other.canonical_bytes();
    }
    bool operator!=(const Datum& other) const { return !(*this == other); }

    static Datum from_canonical_bytes(const std::vector<std::uint8_t>& bytes);

  private:
    // RecordMap boxed to break the recursive type cycle.
    std::variant<double, std::string, BitVec, std::vector<double>,
                 std::shared_ptr<const RecordMap>>
        value_;
};

/// 256-bit digest of a datum's canonical serialization, rendered as lowercase
/// hex. Equal datums get equal ids; lineage never affects the id.
using CaseId = std::string;

CaseId canonical_hash(const Datum& d);

std::string to_display_string(const Datum& d);

}  // namespace morphtest

#endif
