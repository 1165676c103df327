#pragma once

#include <json.hpp>

#include "aiid/registry_service.hpp"

// JSON shapes shared by the HTTP API, its client and the annotations log.
// Digests, keys and signatures are lowercase hex; metadata and proofs are
// base64. Request parsers reject unknown fields, so no request can smuggle
// a commitment or weight bytes past the schema.
namespace aiid::wire {

using json = nlohmann::json;

json to_json(const service::RegistrationBundle& b);
service::RegistrationBundle bundle_from_json(const json& j);

json to_json(const ledger::RegistryEntry& e);
json to_json(const service::EntryView& v);

json to_json(const ledger::StatusUpdate& u);
// ai_id comes from the URL path.
ledger::StatusUpdate status_update_from_json(const PrimaryIdentifier& id, const json& j);

json to_json(const ledger::HistoryItem& h);

json to_json(const service::Challenge& c);
service::Challenge challenge_from_json(const json& j);

json to_json(const service::VerificationVerdict& v);
service::VerificationVerdict verdict_from_json(const json& j);

json to_json(const service::DriftAttestation& a);
service::DriftAttestation drift_attestation_from_json(const json& j);

json to_json(const service::DriftRecord& r);
service::DriftRecord drift_record_from_json(const json& j);

service::Outcome outcome_from_string(std::string_view s);

// Throws ServiceError::malformed if j is not an object, lacks a required
// field, or carries a field outside required + optional.
void check_fields(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {});

}  // namespace aiid::wire
