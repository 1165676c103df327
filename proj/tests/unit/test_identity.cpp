#include <doctest.h>

#include "aiid/canonical_weights.hpp"
#include "aiid/crypto.hpp"
#include "aiid/identity.hpp"
#include "support/oracles.hpp"

using namespace aiid;
using testing_support::openssl_sha256;

namespace {

Commitment abc_commitment() { return compute_commitment(as_bytes("abc")); }

SecondaryFields sample_fields() { return {"US", "TESTOWN1", "ABC", "01", "20250101"}; }

IdentifierError::Kind parse_kind(std::string_view text, bool verify = true, std::size_t* pos = nullptr) {
  try {
    parse_secondary_id(text, verify);
  } catch (const IdentifierError& e) {
    if (pos) *pos = e.position();
    return e.kind();
  }
  FAIL("accepted " << text);
  return IdentifierError::Kind::grammar;
}

}  // namespace

TEST_CASE("SHA-256 agrees with the FIPS vector and an independent implementation") {
  CHECK(to_hex(abc_commitment().digest) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::mt19937_64 rng(11);
  for (std::size_t n : {0, 1, 55, 56, 63, 64, 65, 1000, 100000}) {
    Bytes b = testing_support::random_bytes(rng, n);
    CHECK(compute_commitment(b).digest == openssl_sha256(b));
  }
}

TEST_CASE("commitment of the empty weight stream") {
  Bytes s = weights::serialize({});
  CHECK(to_hex(compute_commitment(s).digest) == "524c6f33709d0a0db6adae5d68b672831734a89c4d081abf052d54906a54a433");
}

TEST_CASE("AI-ID is SHA-256 of namespace then commitment") {
  Commitment zero{};
  CHECK(derive_ai_id(zero, IssuerNamespace("00000000")).hex() ==
        "6a4d6c71d118409eb9c3f73e63d41b77fd1ececae8067fde99fd87fafb109c93");
  CHECK(derive_ai_id(abc_commitment(), IssuerNamespace("TESTOWN1")).hex() ==
        "e346d5c50345d08cc88450c95c1396d521cac232197bbf2d88b806c82e4eb825");

  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    Commitment h{openssl_sha256(testing_support::random_bytes(rng, 40))};
    Bytes pre(as_bytes("ISSUER01").begin(), as_bytes("ISSUER01").end());
    pre.insert(pre.end(), h.digest.begin(), h.digest.end());
    CHECK(derive_ai_id(h, IssuerNamespace("ISSUER01")).digest == openssl_sha256(pre));
  }
}

TEST_CASE("namespaces separate identical commitments") {
  auto h = abc_commitment();
  CHECK(derive_ai_id(h, IssuerNamespace("AAAAAAAA")) != derive_ai_id(h, IssuerNamespace("AAAAAAAB")));
}

TEST_CASE("namespace grammar") {
  CHECK(IssuerNamespace::is_valid("ABCD1234"));
  CHECK_FALSE(IssuerNamespace::is_valid("abcd1234"));
  CHECK_FALSE(IssuerNamespace::is_valid("ABCD123"));
  CHECK_FALSE(IssuerNamespace::is_valid("ABCD12345"));
  CHECK_FALSE(IssuerNamespace::is_valid("ABCD-234"));
  CHECK_THROWS_AS(IssuerNamespace("short"), std::invalid_argument);
}

TEST_CASE("primary identifier hex form") {
  auto id = derive_ai_id(abc_commitment(), IssuerNamespace("TESTOWN1"));
  CHECK(PrimaryIdentifier::from_hex(id.hex()) == id);
  std::string upper = id.hex();
  for (auto& c : upper) c = static_cast<char>(std::toupper(c));
  CHECK_THROWS(PrimaryIdentifier::from_hex(upper));
  CHECK_THROWS(PrimaryIdentifier::from_hex(id.hex().substr(2)));
}

TEST_CASE("single bit flips in the stream change the AI-ID") {
  std::mt19937_64 rng(13);
  Bytes s = weights::serialize(testing_support::random_manifest(rng, 4, 64));
  IssuerNamespace ns("TESTOWN1");
  auto base = derive_ai_id(compute_commitment(s), ns);
  for (int i = 0; i < 1000; ++i) {
    Bytes m = s;
    std::size_t bit = rng() % (m.size() * 8);
    m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    REQUIRE(derive_ai_id(compute_commitment(m), ns) != base);
  }
}

TEST_CASE("secondary id golden value") {
  auto id = build_secondary_id(sample_fields(), abc_commitment());
  CHECK(id.render() == "US-TESTOWN1-ABC01-20250101-04A5-FD");
  CHECK(id.hash_tail == "04A5");
  CHECK(id.checksum == "FD");
  CHECK(parse_secondary_id(id.render(), true) == id);
}

TEST_CASE("hash tail edge values") {
  Commitment h{};
  CHECK(hash_tail(h) == "0000");
  h.digest[29] = h.digest[30] = h.digest[31] = 0xff;  // 16777215 mod 36^4 = 1660671
  CHECK(hash_tail(h) == "ZLDR");
}

TEST_CASE("complete_secondary_id matches build from the commitment") {
  auto h = abc_commitment();
  CHECK(complete_secondary_id(sample_fields(), hash_tail(h)) == build_secondary_id(sample_fields(), h));
}

TEST_CASE("structural parse of published examples") {
  auto id = parse_secondary_id("US-0000000A-GPT4O-20250613-3F7X-K9", false);
  CHECK(id.country == "US");
  CHECK(id.owner_id == "0000000A");
  CHECK(id.family == "GPT");
  CHECK(id.version == "4O");
  CHECK(id.date == "20250613");
  CHECK(id.hash_tail == "3F7X");
  CHECK(id.checksum == "K9");
  CHECK(id.render().size() == 34);
}

TEST_CASE("grammar violations report the offending position") {
  std::size_t pos = 0;
  CHECK(parse_kind("us-TESTOWN1-ABC01-20250101-04A5-FD", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 0);
  CHECK(parse_kind("US_TESTOWN1-ABC01-20250101-04A5-FD", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 2);
  CHECK(parse_kind("US-TESTOWN1-ABC01-2025A101-04A5-FD", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 22);
  CHECK(parse_kind("US-TESTOWN1-ABC01-20250101-04a5-FD", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 29);
  CHECK(parse_kind("US-TESTOWN1-ABC01-20250101-04A5-F", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 33);
  CHECK(parse_kind("US-TESTOWN1-ABC01-20250101-04A5-FDX", true, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 34);
  CHECK(parse_kind("US-TESTOWN1-ABC01-20250230-04A5-FD", false, &pos) == IdentifierError::Kind::grammar);
  CHECK(pos == 18);
}

TEST_CASE("calendar dates") {
  CHECK(is_valid_date("20240229"));
  CHECK_FALSE(is_valid_date("20230229"));
  CHECK(is_valid_date("20000229"));
  CHECK_FALSE(is_valid_date("19000229"));
  CHECK_FALSE(is_valid_date("20251301"));
  CHECK_FALSE(is_valid_date("20250100"));
  CHECK_FALSE(is_valid_date("20250431"));
  CHECK(is_valid_date("20251231"));
}

TEST_CASE("builder rejects bad fields") {
  auto f = sample_fields();
  f.country = "U1";
  CHECK_THROWS_AS(build_secondary_id(f, abc_commitment()), IdentifierError);
  f = sample_fields();
  f.family = "AB";
  CHECK_THROWS_AS(build_secondary_id(f, abc_commitment()), IdentifierError);
  f = sample_fields();
  f.date = "20251301";
  CHECK_THROWS_AS(build_secondary_id(f, abc_commitment()), IdentifierError);
  CHECK_THROWS_AS(complete_secondary_id(sample_fields(), "04a5"), IdentifierError);
}

TEST_CASE("checksum catches single-character substitutions") {
  const std::string good = build_secondary_id(sample_fields(), abc_commitment()).render();
  const std::string alnum = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  int tried = 0, caught = 0;
  for (std::size_t i = 0; i < good.size(); ++i) {
    if (good[i] == '-' || (i >= 18 && i < 26) || i >= 32) continue;  // skip separators, date, checksum
    for (char c : alnum) {
      if (c == good[i]) continue;
      if (i < 2 && !std::isupper(static_cast<unsigned char>(c))) continue;
      std::string t = good;
      t[i] = c;
      ++tried;
      try {
        parse_secondary_id(t, true);
      } catch (const IdentifierError& e) {
        if (e.kind() == IdentifierError::Kind::checksum) ++caught;
      }
    }
  }
  MESSAGE("caught " << caught << " of " << tried);
  CHECK(static_cast<double>(caught) / tried >= 0.995);
}
