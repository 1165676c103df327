#include "aiid/wire.hpp"

#include <algorithm>

namespace aiid::wire {

using service::ServiceError;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw ServiceError(ServiceError::Kind::malformed, what); }

std::string str(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t u64(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    malformed(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <std::size_t N>
std::array<std::uint8_t, N> hex_field(const json& j, const char* key) {
  try {
    return fixed_from_hex<N>(str(j, key));
  } catch (const std::invalid_argument& e) {
    malformed(std::string("field '") + key + "': " + e.what());
  }
}

PrimaryIdentifier id_field(const json& j, const char* key) {
  try {
    return PrimaryIdentifier::from_hex(str(j, key));
  } catch (const std::invalid_argument& e) {
    malformed(std::string("field '") + key + "': " + e.what());
  }
}

Bytes b64_field(const json& j, const char* key) {
  try {
    return from_base64(str(j, key));
  } catch (const std::invalid_argument& e) {
    malformed(std::string("field '") + key + "': " + e.what());
  }
}

ledger::TestingStatus status_field(const json& j, const char* key) {
  auto s = str(j, key);
  if (s.size() != 1) malformed("status must be one of U, P, F, X");
  try {
    return ledger::status_from_char(s[0]);
  } catch (const std::invalid_argument& e) {
    malformed(e.what());
  }
}

std::string status_text(ledger::TestingStatus s) { return std::string(1, ledger::to_char(s)); }

}  // namespace

void check_fields(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  if (!j.is_object()) malformed("request body must be a JSON object");
  for (const char* k : required) {
    if (!j.contains(k)) malformed(std::string("missing field '") + k + "'");
  }
  for (const auto& [k, _] : j.items()) {
    auto is = [&](const char* c) { return k == c; };
    if (std::none_of(required.begin(), required.end(), is) && std::none_of(optional.begin(), optional.end(), is)) {
      malformed("unexpected field '" + k + "'");
    }
  }
}

json to_json(const service::RegistrationBundle& b) {
  json j{{"namespace", b.ns},
         {"country", b.country},
         {"family", b.family},
         {"version", b.version},
         {"date", b.date},
         {"hash_tail", b.hash_tail},
         {"ai_id", b.ai_id.hex()},
         {"zkp_anchor", to_hex(b.zkp_anchor)},
         {"metadata", to_base64(b.metadata)},
         {"developer_public_key", to_hex(b.developer_public_key)},
         {"registered_at", b.registered_at},
         {"developer_signature", to_hex(b.developer_signature)}};
  if (!b.risk_class.empty()) j["risk_class"] = b.risk_class;
  return j;
}

service::RegistrationBundle bundle_from_json(const json& j) {
  check_fields(j,
               {"namespace", "country", "family", "version", "date", "hash_tail", "ai_id", "zkp_anchor", "metadata",
                "developer_public_key", "registered_at", "developer_signature"},
               {"risk_class"});
  service::RegistrationBundle b;
  b.ns = str(j, "namespace");
  b.country = str(j, "country");
  b.family = str(j, "family");
  b.version = str(j, "version");
  b.date = str(j, "date");
  b.hash_tail = str(j, "hash_tail");
  b.ai_id = id_field(j, "ai_id");
  b.zkp_anchor = hex_field<32>(j, "zkp_anchor");
  b.metadata = b64_field(j, "metadata");
  b.developer_public_key = hex_field<32>(j, "developer_public_key");
  b.registered_at = u64(j, "registered_at");
  b.developer_signature = hex_field<64>(j, "developer_signature");
  if (j.contains("risk_class")) b.risk_class = str(j, "risk_class");
  return b;
}

json to_json(const ledger::RegistryEntry& e) {
  return {{"ai_id", e.ai_id.hex()},
          {"secondary_id", e.secondary_id.render()},
          {"namespace", e.ns.text()},
          {"zkp_anchor", to_hex(e.zkp_anchor)},
          {"metadata_digest", to_hex(e.metadata_digest)},
          {"developer_public_key", to_hex(e.developer_public_key)},
          {"developer_signature", to_hex(e.developer_signature)},
          {"registered_at", e.registered_at}};
}

json to_json(const service::EntryView& v) {
  return {{"entry", to_json(v.entry)},
          {"status", status_text(v.status)},
          {"risk_class", v.risk_class},
          {"drift_flagged", v.drift_flagged}};
}

json to_json(const ledger::StatusUpdate& u) {
  return {{"status", status_text(u.new_status)},
          {"timestamp", u.timestamp},
          {"authority_public_key", to_hex(u.authority_public_key)},
          {"authority_signature", to_hex(u.authority_signature)}};
}

ledger::StatusUpdate status_update_from_json(const PrimaryIdentifier& id, const json& j) {
  check_fields(j, {"status", "timestamp", "authority_public_key", "authority_signature"});
  ledger::StatusUpdate u;
  u.ai_id = id;
  u.new_status = status_field(j, "status");
  u.timestamp = u64(j, "timestamp");
  u.authority_public_key = hex_field<32>(j, "authority_public_key");
  u.authority_signature = hex_field<64>(j, "authority_signature");
  return u;
}

json to_json(const ledger::HistoryItem& h) {
  return {{"status", status_text(h.status)}, {"timestamp", h.timestamp}, {"block_index", h.block_index}};
}

json to_json(const service::Challenge& c) {
  return {{"challenge_id", to_hex(c.challenge_id)},
          {"ai_id", c.ai_id.hex()},
          {"nonce", to_hex(c.nonce)},
          {"issued_at", c.issued_at},
          {"expires_at", c.expires_at}};
}

service::Challenge challenge_from_json(const json& j) {
  check_fields(j, {"challenge_id", "ai_id", "nonce", "issued_at", "expires_at"});
  service::Challenge c;
  c.challenge_id = hex_field<16>(j, "challenge_id");
  c.ai_id = id_field(j, "ai_id");
  c.nonce = hex_field<32>(j, "nonce");
  c.issued_at = u64(j, "issued_at");
  c.expires_at = u64(j, "expires_at");
  return c;
}

service::Outcome outcome_from_string(std::string_view s) {
  using O = service::Outcome;
  for (O o : {O::verified, O::rejected, O::unregistered, O::expired, O::status_blocked}) {
    if (s == service::to_string(o)) return o;
  }
  malformed("unknown outcome '" + std::string(s) + "'");
}

json to_json(const service::VerificationVerdict& v) {
  return {{"challenge_id", to_hex(v.challenge_id)},
          {"outcome", service::to_string(v.outcome)},
          {"status", v.status ? json(status_text(*v.status)) : json(nullptr)},
          {"detail", v.detail}};
}

service::VerificationVerdict verdict_from_json(const json& j) {
  check_fields(j, {"challenge_id", "outcome", "status", "detail"});
  service::VerificationVerdict v;
  v.challenge_id = hex_field<16>(j, "challenge_id");
  v.outcome = outcome_from_string(str(j, "outcome"));
  if (!j.at("status").is_null()) v.status = status_field(j, "status");
  v.detail = str(j, "detail");
  return v;
}

json to_json(const service::DriftAttestation& a) {
  return {{"ai_id", a.ai_id.hex()},
          {"score", a.score},
          {"mode", lzjd::to_string(a.mode)},
          {"candidate_sketch_digest", to_hex(a.candidate_sketch_digest)},
          {"reported_at", a.reported_at},
          {"reporter_public_key", to_hex(a.reporter_public_key)},
          {"reporter_signature", to_hex(a.reporter_signature)}};
}

service::DriftAttestation drift_attestation_from_json(const json& j) {
  check_fields(j, {"ai_id", "score", "mode", "candidate_sketch_digest", "reported_at", "reporter_public_key",
                   "reporter_signature"});
  service::DriftAttestation a;
  a.ai_id = id_field(j, "ai_id");
  if (!j.at("score").is_number()) malformed("field 'score' must be a number");
  a.score = j.at("score").get<double>();
  try {
    a.mode = lzjd::mode_from_string(str(j, "mode"));
  } catch (const std::invalid_argument& e) {
    malformed(e.what());
  }
  a.candidate_sketch_digest = hex_field<32>(j, "candidate_sketch_digest");
  a.reported_at = u64(j, "reported_at");
  a.reporter_public_key = hex_field<32>(j, "reporter_public_key");
  a.reporter_signature = hex_field<64>(j, "reporter_signature");
  return a;
}

json to_json(const service::DriftRecord& r) {
  return {{"attestation", to_json(r.attestation)},
          {"outcome", lzjd::to_string(r.outcome)},
          {"policy_id", r.policy_id},
          {"threshold", r.threshold}};
}

service::DriftRecord drift_record_from_json(const json& j) {
  check_fields(j, {"attestation", "outcome", "policy_id", "threshold"});
  service::DriftRecord r;
  r.attestation = drift_attestation_from_json(j.at("attestation"));
  r.outcome = str(j, "outcome") == "DRIFTED" ? lzjd::Outcome::drifted : lzjd::Outcome::within;
  r.policy_id = str(j, "policy_id");
  r.threshold = j.at("threshold").get<double>();
  return r;
}

}  // namespace aiid::wire
