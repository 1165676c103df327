#include "aiid/identity.hpp"

#include <algorithm>

#include "aiid/crypto.hpp"

namespace aiid {

namespace {

constexpr char kBase36[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_upper(c) || is_digit(c); }

std::string base36(std::uint32_t value, int width) {
  std::string out(static_cast<std::size_t>(width), '0');
  for (int i = width - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kBase36[value % 36];
    value /= 36;
  }
  return out;
}

template <class Pred>
bool all_of_len(std::string_view s, std::size_t n, Pred p) {
  return s.size() == n && std::all_of(s.begin(), s.end(), p);
}

void check_fields(const SecondaryFields& f) {
  auto fail = [](const std::string& what) {
    throw IdentifierError(IdentifierError::Kind::grammar, 0, what);
  };
  if (!all_of_len(f.country, 2, is_upper)) fail("country must be 2 letters A-Z");
  if (!all_of_len(f.owner_id, 8, is_alnum)) fail("owner id must be 8 characters [A-Z0-9]");
  if (!all_of_len(f.family, 3, is_alnum)) fail("family must be 3 characters [A-Z0-9]");
  if (!all_of_len(f.version, 2, is_alnum)) fail("version must be 2 characters [A-Z0-9]");
  if (!is_valid_date(f.date)) fail("date must be a valid YYYYMMDD calendar date");
}

}  // namespace

IssuerNamespace::IssuerNamespace(std::string_view text) : text_(text) {
  if (!is_valid(text)) throw std::invalid_argument("namespace must match [A-Z0-9]{8}");
}

bool IssuerNamespace::is_valid(std::string_view text) { return all_of_len(text, 8, is_alnum); }

PrimaryIdentifier PrimaryIdentifier::from_hex(std::string_view text) {
  if (text.size() != 64 || !std::all_of(text.begin(), text.end(), [](char c) {
        return is_digit(c) || (c >= 'a' && c <= 'f');
      })) {
    throw std::invalid_argument("AI-ID must be 64 lowercase hex characters");
  }
  return {fixed_from_hex<32>(text)};
}

Commitment compute_commitment(ByteView canonical_stream) {
  return {crypto::sha256(canonical_stream)};
}

PrimaryIdentifier derive_ai_id(const Commitment& h, const IssuerNamespace& ns) {
  return {crypto::Sha256().update(ns.text()).update(h.digest).finish()};
}

std::string SecondaryIdentifier::render() const {
  return country + "-" + owner_id + "-" + family + version + "-" + date + "-" + hash_tail + "-" +
         checksum;
}

bool is_valid_date(std::string_view s) {
  if (!all_of_len(s, 8, is_digit)) return false;
  auto num = [&](std::size_t at, std::size_t n) {
    int v = 0;
    for (std::size_t i = at; i < at + n; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  int y = num(0, 4), m = num(4, 2), d = num(6, 2);
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

std::string hash_tail(const Commitment& h) {
  std::uint32_t v = static_cast<std::uint32_t>(h.digest[29]) << 16 |
                    static_cast<std::uint32_t>(h.digest[30]) << 8 | h.digest[31];
  return base36(v % (36u * 36 * 36 * 36), 4);
}

std::string secondary_checksum(const SecondaryFields& f, std::string_view tail) {
  Digest d = crypto::Sha256()
                 .update(f.country)
                 .update(f.owner_id)
                 .update(f.family)
                 .update(f.version)
                 .update(f.date)
                 .update(tail)
                 .finish();
  std::uint32_t v = static_cast<std::uint32_t>(d[0]) << 8 | d[1];
  return base36(v % (36u * 36), 2);
}

SecondaryIdentifier complete_secondary_id(const SecondaryFields& f, std::string_view tail) {
  check_fields(f);
  if (!all_of_len(tail, 4, is_alnum)) {
    throw IdentifierError(IdentifierError::Kind::grammar, 0, "hash tail must be 4 characters [A-Z0-9]");
  }
  return {f.country, f.owner_id, f.family, f.version, f.date, std::string(tail),
          secondary_checksum(f, tail)};
}

SecondaryIdentifier build_secondary_id(const SecondaryFields& f, const Commitment& h) {
  return complete_secondary_id(f, hash_tail(h));
}

SecondaryIdentifier parse_secondary_id(std::string_view text, bool verify_checksum) {
  // Template: C=upper, A=alnum, D=digit, '-' literal.
  static constexpr std::string_view kShape = "CC-AAAAAAAA-AAAAA-DDDDDDDD-AAAA-AA";
  for (std::size_t i = 0; i < std::min(text.size(), kShape.size()); ++i) {
    char c = text[i];
    bool ok = false;
    switch (kShape[i]) {
      case 'C': ok = is_upper(c); break;
      case 'A': ok = is_alnum(c); break;
      case 'D': ok = is_digit(c); break;
      default: ok = c == kShape[i]; break;
    }
    if (!ok) {
      throw IdentifierError(IdentifierError::Kind::grammar, i,
                            "unexpected character '" + std::string(1, c) + "' at position " + std::to_string(i));
    }
  }
  if (text.size() != kShape.size()) {
    std::size_t at = std::min(text.size(), kShape.size());
    throw IdentifierError(IdentifierError::Kind::grammar, at,
                          "secondary id must be " + std::to_string(kShape.size()) + " characters");
  }
  auto part = [&](std::size_t at, std::size_t n) { return std::string(text.substr(at, n)); };
  SecondaryIdentifier id{part(0, 2), part(3, 8), part(12, 3), part(15, 2), part(18, 8), part(27, 4), part(32, 2)};
  if (!is_valid_date(id.date)) {
    throw IdentifierError(IdentifierError::Kind::grammar, 18, "date is not a valid calendar date");
  }
  if (verify_checksum) {
    SecondaryFields f{id.country, id.owner_id, id.family, id.version, id.date};
    if (secondary_checksum(f, id.hash_tail) != id.checksum) {
      throw IdentifierError(IdentifierError::Kind::checksum, 32, "checksum mismatch");
    }
  }
  return id;
}

}  // namespace aiid
