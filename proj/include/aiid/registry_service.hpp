#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "aiid/ledger.hpp"
#include "aiid/lzjd.hpp"
#include "aiid/possession.hpp"

// Governance endpoint logic: registration, status updates, checkpoint
// challenges, proof verification, drift attestations and ledger audit.
// Transport-free; http_api.hpp binds it to HTTP.
namespace aiid::service {

using ledger::TestingStatus;

struct ServiceConfig {
  std::filesystem::path ledger_path;  // empty: in-memory
  // Drift attestations and risk-class assignments (JSON lines). Defaults to
  // "<ledger_path>.annotations.jsonl" when a ledger path is set.
  std::filesystem::path annotations_path;
  std::vector<crypto::PublicKey> authorities;
  std::uint64_t challenge_ttl = 300;
  // Drift threshold per risk class. No class has a built-in threshold.
  std::map<std::string, double> drift_policies;
  std::string default_risk_class = "default";
  // Registrations must anchor a proof system with at least this many rounds.
  std::uint16_t min_rounds = zk::kDefaultRounds;
  std::uint16_t max_rounds = 1024;
  // Allowed distance between a bundle's registered_at and the service clock.
  std::uint64_t max_clock_skew = 600;
  ledger::Clock clock = ledger::system_clock_seconds;
  zk::RandomFill rng = crypto::random_bytes;
};

class ServiceError : public std::runtime_error {
 public:
  enum class Kind {
    malformed,
    duplicate,
    bad_signature,
    unregistered,
    illegal_transition,
    unauthorized,
    unknown_challenge,
    no_policy,
    beyond_head,
  };
  ServiceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(ServiceError::Kind k);

// What a developer submits. The developer signs the registry entry this
// bundle expands to (ledger::entry_signing_bytes), so the signature covers
// the checksum and the metadata digest as the registry will record them.
struct RegistrationBundle {
  std::string ns;
  std::string country;
  std::string family;
  std::string version;
  std::string date;
  std::string hash_tail;
  PrimaryIdentifier ai_id;
  Digest zkp_anchor{};
  Bytes metadata;
  crypto::PublicKey developer_public_key{};
  std::uint64_t registered_at = 0;
  crypto::Signature developer_signature{};
  std::string risk_class;  // empty: service default
};

// Expands a bundle to the entry that will be recorded (signature copied as-is).
// Throws ServiceError::malformed on grammar violations.
ledger::RegistryEntry entry_from_bundle(const RegistrationBundle& b);
// Developer side: fills in the signature over the expanded entry.
void sign_bundle(RegistrationBundle& b, const crypto::SecretKey& sk);

struct Registration {
  ledger::RegistryEntry entry;
  TestingStatus status;
  std::uint64_t block_index;
};

struct Challenge {
  std::array<std::uint8_t, 16> challenge_id{};
  PrimaryIdentifier ai_id;
  zk::Nonce nonce{};
  std::uint64_t issued_at = 0;
  std::uint64_t expires_at = 0;
};

enum class Outcome { verified, rejected, unregistered, expired, status_blocked };
const char* to_string(Outcome o);

struct VerificationVerdict {
  std::array<std::uint8_t, 16> challenge_id{};
  Outcome outcome = Outcome::rejected;
  std::optional<TestingStatus> status;
  std::string detail;
};

struct DriftAttestation {
  PrimaryIdentifier ai_id;
  double score = 0;
  lzjd::Mode mode = lzjd::Mode::exact;
  Digest candidate_sketch_digest{};
  std::uint64_t reported_at = 0;
  crypto::PublicKey reporter_public_key{};
  crypto::Signature reporter_signature{};
};

Bytes drift_signing_bytes(const DriftAttestation& a);
void sign_drift(DriftAttestation& a, const crypto::SecretKey& sk);

struct DriftRecord {
  DriftAttestation attestation;
  lzjd::Outcome outcome;
  std::string policy_id;
  double threshold;
};

struct EntryView {
  ledger::RegistryEntry entry;
  TestingStatus status;
  std::string risk_class;
  bool drift_flagged = false;
};

class RegistryService {
 public:
  explicit RegistryService(ServiceConfig cfg);

  Registration register_model(const RegistrationBundle& bundle);
  Registration update_status(const ledger::StatusUpdate& update);
  EntryView lookup(const PrimaryIdentifier& id) const;
  std::vector<ledger::HistoryItem> history(const PrimaryIdentifier& id) const;

  Challenge issue_challenge(const PrimaryIdentifier& id);
  // Consumes the challenge whatever the outcome.
  VerificationVerdict submit_proof(const std::array<std::uint8_t, 16>& challenge_id, ByteView proof);

  DriftRecord record_drift_attestation(const DriftAttestation& a);
  std::vector<DriftRecord> drift_records(const PrimaryIdentifier& id) const;

  std::vector<Bytes> audit_blocks(std::uint64_t from) const;
  std::uint64_t height() const { return ledger_.height(); }
  ledger::ChainCheck verify_chain() const { return ledger_.verify_chain(); }

  const ServiceConfig& config() const { return cfg_; }

 private:
  void persist(const std::string& line);
  void replay_annotations();
  std::optional<std::uint16_t> rounds_for_anchor(const Digest& anchor) const;

  ServiceConfig cfg_;
  ledger::Ledger ledger_;

  mutable std::mutex challenges_mu_;
  std::map<std::array<std::uint8_t, 16>, Challenge> challenges_;
  std::set<zk::Nonce> used_nonces_;

  mutable std::mutex annotations_mu_;
  std::map<PrimaryIdentifier, std::string> risk_class_;
  std::map<PrimaryIdentifier, std::vector<DriftRecord>> drift_;
  std::ofstream annotations_;
};

}  // namespace aiid::service
