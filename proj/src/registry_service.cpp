#include "aiid/registry_service.hpp"

#include <bit>
#include <iterator>

#include "aiid/wire.hpp"

namespace aiid::service {

const char* to_string(ServiceError::Kind k) {
  using K = ServiceError::Kind;
  switch (k) {
    case K::malformed: return "MALFORMED";
    case K::duplicate: return "DUPLICATE";
    case K::bad_signature: return "BAD_SIGNATURE";
    case K::unregistered: return "UNREGISTERED";
    case K::illegal_transition: return "ILLEGAL_TRANSITION";
    case K::unauthorized: return "UNAUTHORIZED";
    case K::unknown_challenge: return "UNKNOWN_CHALLENGE";
    case K::no_policy: return "NO_POLICY";
    case K::beyond_head: return "BEYOND_HEAD";
  }
  return "ERROR";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::verified: return "VERIFIED";
    case Outcome::rejected: return "REJECTED";
    case Outcome::unregistered: return "UNREGISTERED";
    case Outcome::expired: return "EXPIRED";
    case Outcome::status_blocked: return "STATUS_BLOCKED";
  }
  return "REJECTED";
}

namespace {

ServiceError translate(const ledger::LedgerError& e) {
  using L = ledger::LedgerError::Kind;
  using K = ServiceError::Kind;
  switch (e.kind()) {
    case L::duplicate: return {K::duplicate, e.what()};
    case L::invalid_signature: return {K::bad_signature, e.what()};
    case L::unknown_id: return {K::unregistered, e.what()};
    case L::illegal_transition: return {K::illegal_transition, e.what()};
    case L::unauthorized: return {K::unauthorized, e.what()};
    default: return {K::malformed, e.what()};
  }
}

std::uint64_t distance(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

}  // namespace

ledger::RegistryEntry entry_from_bundle(const RegistrationBundle& b) {
  if (!IssuerNamespace::is_valid(b.ns)) throw ServiceError(ServiceError::Kind::malformed, "namespace must match [A-Z0-9]{8}");
  SecondaryIdentifier sid;
  try {
    sid = complete_secondary_id({b.country, b.ns, b.family, b.version, b.date}, b.hash_tail);
  } catch (const IdentifierError& e) {
    throw ServiceError(ServiceError::Kind::malformed, e.what());
  }
  ledger::RegistryEntry e{b.ai_id, sid, IssuerNamespace(b.ns)};
  e.zkp_anchor = b.zkp_anchor;
  e.metadata_digest = crypto::sha256(b.metadata);
  e.developer_public_key = b.developer_public_key;
  e.developer_signature = b.developer_signature;
  e.registered_at = b.registered_at;
  return e;
}

void sign_bundle(RegistrationBundle& b, const crypto::SecretKey& sk) {
  b.developer_public_key = crypto::public_key_of(sk);
  b.developer_signature = crypto::sign(sk, ledger::entry_signing_bytes(entry_from_bundle(b)));
}

Bytes drift_signing_bytes(const DriftAttestation& a) {
  ByteWriter w;
  w.raw(std::string_view("DRIFT-ATTESTATION"));
  w.raw(a.ai_id.digest);
  w.u64(std::bit_cast<std::uint64_t>(a.score));
  w.u8(a.mode == lzjd::Mode::sketch ? 2 : 1);
  w.raw(a.candidate_sketch_digest);
  w.u64(a.reported_at);
  return std::move(w).take();
}

void sign_drift(DriftAttestation& a, const crypto::SecretKey& sk) {
  a.reporter_public_key = crypto::public_key_of(sk);
  a.reporter_signature = crypto::sign(sk, drift_signing_bytes(a));
}

RegistryService::RegistryService(ServiceConfig cfg)
    : cfg_(std::move(cfg)), ledger_(ledger::Ledger::Options{cfg_.ledger_path, cfg_.authorities, cfg_.clock}) {
  if (!cfg_.clock) cfg_.clock = ledger::system_clock_seconds;
  if (!cfg_.rng) cfg_.rng = crypto::random_bytes;
  if (cfg_.challenge_ttl == 0) throw std::invalid_argument("challenge TTL must be positive");
  for (const auto& [cls, tau] : cfg_.drift_policies) lzjd::DriftPolicy(tau, cls);  // validates range
  if (cfg_.annotations_path.empty() && !cfg_.ledger_path.empty()) {
    cfg_.annotations_path = cfg_.ledger_path.string() + ".annotations.jsonl";
  }
  if (!cfg_.annotations_path.empty()) {
    replay_annotations();
    annotations_.open(cfg_.annotations_path, std::ios::app);
    if (!annotations_) throw std::runtime_error("cannot open " + cfg_.annotations_path.string());
  }
}

void RegistryService::replay_annotations() {
  std::ifstream in(cfg_.annotations_path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      auto j = wire::json::parse(line);
      auto id = PrimaryIdentifier::from_hex(j.at("ai_id").get<std::string>());
      if (j.at("type") == "risk_class") {
        risk_class_[id] = j.at("class").get<std::string>();
      } else if (j.at("type") == "drift") {
        drift_[id].push_back(wire::drift_record_from_json(j.at("record")));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("annotations line " + std::to_string(n) + " unreadable: " + e.what());
    }
  }
}

void RegistryService::persist(const std::string& line) {
  if (!annotations_.is_open()) return;
  annotations_ << line << '\n';
  annotations_.flush();
  if (!annotations_) throw std::runtime_error("annotations append failed");
}

std::optional<std::uint16_t> RegistryService::rounds_for_anchor(const Digest& anchor) const {
  for (std::uint32_t r = cfg_.min_rounds; r <= cfg_.max_rounds; ++r) {
    if (zk::zkp_anchor(static_cast<std::uint16_t>(r)) == anchor) return static_cast<std::uint16_t>(r);
  }
  return std::nullopt;
}

Registration RegistryService::register_model(const RegistrationBundle& bundle) {
  using K = ServiceError::Kind;
  auto entry = entry_from_bundle(bundle);
  std::string cls = bundle.risk_class.empty() ? cfg_.default_risk_class : bundle.risk_class;
  if (!bundle.risk_class.empty() && !cfg_.drift_policies.count(cls)) {
    throw ServiceError(K::malformed, "unknown risk class '" + cls + "'");
  }
  if (!rounds_for_anchor(entry.zkp_anchor)) {
    throw ServiceError(K::malformed, "zkp_anchor does not name an accepted proof system (need >= " +
                                         std::to_string(cfg_.min_rounds) + " rounds)");
  }
  if (distance(entry.registered_at, cfg_.clock()) > cfg_.max_clock_skew) {
    throw ServiceError(K::malformed, "registered_at too far from service time");
  }

  ledger::LedgerBlock block;
  try {
    block = ledger_.append_register(entry);
  } catch (const ledger::LedgerError& e) {
    throw translate(e);
  }
  {
    std::lock_guard lock(annotations_mu_);
    risk_class_[entry.ai_id] = cls;
    persist(wire::json{{"type", "risk_class"}, {"ai_id", entry.ai_id.hex()}, {"class", cls}}.dump());
  }
  return {entry, TestingStatus::U, block.index};
}

Registration RegistryService::update_status(const ledger::StatusUpdate& update) {
  try {
    auto block = ledger_.append_status(update);
    return {ledger_.lookup(update.ai_id).first, update.new_status, block.index};
  } catch (const ledger::LedgerError& e) {
    throw translate(e);
  }
}

EntryView RegistryService::lookup(const PrimaryIdentifier& id) const {
  auto found = [&] {
    try {
      return ledger_.lookup(id);
    } catch (const ledger::LedgerError& e) {
      throw translate(e);
    }
  }();
  EntryView v{found.first, found.second, {}, false};
  std::lock_guard lock(annotations_mu_);
  auto rc = risk_class_.find(id);
  v.risk_class = rc != risk_class_.end() ? rc->second : cfg_.default_risk_class;
  auto dr = drift_.find(id);
  if (dr != drift_.end()) {
    for (const auto& r : dr->second) v.drift_flagged = v.drift_flagged || r.outcome == lzjd::Outcome::drifted;
  }
  return v;
}

std::vector<ledger::HistoryItem> RegistryService::history(const PrimaryIdentifier& id) const {
  try {
    return ledger_.history(id);
  } catch (const ledger::LedgerError& e) {
    throw translate(e);
  }
}

Challenge RegistryService::issue_challenge(const PrimaryIdentifier& id) {
  if (!ledger_.contains(id)) throw ServiceError(ServiceError::Kind::unregistered, "AI-ID is not registered: " + id.hex());
  Challenge c;
  c.ai_id = id;
  c.issued_at = cfg_.clock();
  c.expires_at = c.issued_at + cfg_.challenge_ttl;
  std::lock_guard lock(challenges_mu_);
  do {
    cfg_.rng(c.nonce);
  } while (used_nonces_.count(c.nonce));
  do {
    cfg_.rng(c.challenge_id);
  } while (challenges_.count(c.challenge_id));
  used_nonces_.insert(c.nonce);
  challenges_.emplace(c.challenge_id, c);
  return c;
}

VerificationVerdict RegistryService::submit_proof(const std::array<std::uint8_t, 16>& challenge_id, ByteView proof) {
  Challenge c;
  {
    std::lock_guard lock(challenges_mu_);
    auto it = challenges_.find(challenge_id);
    if (it == challenges_.end()) {
      throw ServiceError(ServiceError::Kind::unknown_challenge, "unknown or already consumed challenge");
    }
    c = it->second;
    challenges_.erase(it);
  }

  VerificationVerdict v;
  v.challenge_id = challenge_id;
  if (cfg_.clock() > c.expires_at) {
    v.outcome = Outcome::expired;
    v.detail = "challenge expired";
    return v;
  }
  if (!ledger_.contains(c.ai_id)) {
    v.outcome = Outcome::unregistered;
    v.detail = "AI-ID is not registered";
    return v;
  }
  auto [entry, status] = ledger_.lookup(c.ai_id);
  v.status = status;

  zk::PossessionProof parsed;
  try {
    parsed = zk::parse_proof(proof);
  } catch (const std::exception& e) {
    v.outcome = Outcome::rejected;
    v.detail = std::string("malformed proof: ") + e.what();
    return v;
  }
  auto rounds = static_cast<std::uint16_t>(parsed.rounds.size());
  if (zk::zkp_anchor(rounds) != entry.zkp_anchor) {
    v.outcome = Outcome::rejected;
    v.detail = "proof parameters do not match the registered ZKP anchor";
    return v;
  }

  zk::PossessionStatement st{c.ai_id, entry.ns, rounds, c.nonce};
  auto result = zk::verify(st, parsed);
  if (!result.accepted()) {
    v.outcome = Outcome::rejected;
    v.detail = std::string(zk::to_string(result.failure));
    if (result.round) v.detail += " in round " + std::to_string(*result.round);
    v.detail += ": " + result.detail;
    return v;
  }
  if (status != TestingStatus::P) {
    v.outcome = Outcome::status_blocked;
    v.detail = std::string("proof valid but testing status is ") + ledger::to_char(status);
    return v;
  }
  v.outcome = Outcome::verified;
  v.detail = "proof of possession verified";
  return v;
}

DriftRecord RegistryService::record_drift_attestation(const DriftAttestation& a) {
  using K = ServiceError::Kind;
  if (!ledger_.contains(a.ai_id)) throw ServiceError(K::unregistered, "AI-ID is not registered: " + a.ai_id.hex());
  if (!(a.score >= 0.0 && a.score <= 1.0)) throw ServiceError(K::malformed, "score must lie in [0,1]");
  if (!crypto::verify(a.reporter_public_key, drift_signing_bytes(a), a.reporter_signature)) {
    throw ServiceError(K::bad_signature, "reporter signature does not verify");
  }

  std::lock_guard lock(annotations_mu_);
  auto rc = risk_class_.find(a.ai_id);
  std::string cls = rc != risk_class_.end() ? rc->second : cfg_.default_risk_class;
  auto pol = cfg_.drift_policies.find(cls);
  if (pol == cfg_.drift_policies.end()) {
    throw ServiceError(K::no_policy, "no drift threshold configured for risk class '" + cls + "'");
  }
  lzjd::DriftPolicy policy(pol->second, cls);
  DriftRecord rec{a, lzjd::classify(a.score, policy), policy.policy_id, policy.threshold};
  persist(wire::json{{"type", "drift"}, {"ai_id", a.ai_id.hex()}, {"record", wire::to_json(rec)}}.dump());
  drift_[a.ai_id].push_back(rec);
  return rec;
}

std::vector<DriftRecord> RegistryService::drift_records(const PrimaryIdentifier& id) const {
  std::lock_guard lock(annotations_mu_);
  auto it = drift_.find(id);
  return it == drift_.end() ? std::vector<DriftRecord>{} : it->second;
}

std::vector<Bytes> RegistryService::audit_blocks(std::uint64_t from) const {
  try {
    return ledger_.block_bytes(from);
  } catch (const std::out_of_range& e) {
    throw ServiceError(ServiceError::Kind::beyond_head, e.what());
  }
}

}  // namespace aiid::service
