#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "aiid/bytes.hpp"

namespace aiid {

// H_w: SHA-256 over a canonical weight stream. Secret to the model owner.
struct Commitment {
  Digest digest{};
  auto operator<=>(const Commitment&) const = default;
};

// The 8-character issuer code ([A-Z0-9]{8}) that namespaces AI-IDs.
class IssuerNamespace {
 public:
  // Throws std::invalid_argument unless text matches [A-Z0-9]{8}.
  explicit IssuerNamespace(std::string_view text);
  static bool is_valid(std::string_view text);

  const std::string& text() const { return text_; }
  auto operator<=>(const IssuerNamespace&) const = default;

 private:
  std::string text_;
};

// AI-ID = SHA-256(namespace || H_w). The only identifier disclosed externally.
struct PrimaryIdentifier {
  Digest digest{};

  std::string hex() const { return to_hex(digest); }
  // Accepts exactly 64 lowercase hex characters.
  static PrimaryIdentifier from_hex(std::string_view text);
  auto operator<=>(const PrimaryIdentifier&) const = default;
};

struct PrimaryIdentifierHash {
  std::size_t operator()(const PrimaryIdentifier& id) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = h << 8 | id.digest[i];
    return h;
  }
};

Commitment compute_commitment(ByteView canonical_stream);
PrimaryIdentifier derive_ai_id(const Commitment& h, const IssuerNamespace& ns);

// Human-readable label: CC-OOOOOOOO-FFFVV-YYYYMMDD-TTTT-KK
struct SecondaryIdentifier {
  std::string country;  // 2 x A-Z
  std::string owner_id;  // 8 x [A-Z0-9]
  std::string family;  // 3 x [A-Z0-9]
  std::string version;  // 2 x [A-Z0-9]
  std::string date;  // YYYYMMDD, real calendar date
  std::string hash_tail;  // 4 x [A-Z0-9]
  std::string checksum;  // 2 x [A-Z0-9]

  std::string render() const;
  bool operator==(const SecondaryIdentifier&) const = default;
};

// The developer-chosen fields; hash tail and checksum are derived.
struct SecondaryFields {
  std::string country;
  std::string owner_id;
  std::string family;
  std::string version;
  std::string date;
};

class IdentifierError : public std::runtime_error {
 public:
  enum class Kind { grammar, checksum };
  IdentifierError(Kind kind, std::size_t position, const std::string& what)
      : std::runtime_error(what), kind_(kind), position_(position) {}
  Kind kind() const noexcept { return kind_; }
  // Character index into the rendered text (grammar) or of the checksum group.
  std::size_t position() const noexcept { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

// base-36 of (last 3 bytes of H_w, big-endian) mod 36^4, four characters.
std::string hash_tail(const Commitment& h);
// base-36 of (first 2 bytes of SHA-256(fields || tail), big-endian) mod 36^2.
std::string secondary_checksum(const SecondaryFields& f, std::string_view tail);

// Validates fields and builds the full identifier from H_w.
SecondaryIdentifier build_secondary_id(const SecondaryFields& f, const Commitment& h);
// Same, for parties that hold only the tail (the registry never sees H_w).
SecondaryIdentifier complete_secondary_id(const SecondaryFields& f, std::string_view tail);

SecondaryIdentifier parse_secondary_id(std::string_view text, bool verify_checksum);

bool is_valid_date(std::string_view yyyymmdd);

}  // namespace aiid
