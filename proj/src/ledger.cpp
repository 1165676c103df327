#include "aiid/ledger.hpp"

#include <chrono>
#include <iterator>
#include <mutex>

namespace aiid::ledger {

namespace {

constexpr std::uint8_t kRegisterTag = 1;
constexpr std::uint8_t kStatusTag = 2;

void encode_entry_fields(ByteWriter& w, const RegistryEntry& e, bool with_signature) {
  w.raw(e.ai_id.digest);
  w.var16(e.secondary_id.render());
  w.var16(e.ns.text());
  w.raw(e.zkp_anchor);
  w.raw(e.metadata_digest);
  w.raw(e.developer_public_key);
  if (with_signature) w.raw(e.developer_signature);
  w.u64(e.registered_at);
}

std::string as_text(ByteView v) { return {v.begin(), v.end()}; }

void encode_event(ByteWriter& w, const LedgerEvent& ev) {
  if (const auto* r = std::get_if<RegisterEvent>(&ev)) {
    w.u8(kRegisterTag);
    w.u64(r->timestamp);
    encode_entry_fields(w, r->entry, true);
  } else {
    const auto& s = std::get<StatusUpdate>(ev);
    w.u8(kStatusTag);
    w.u64(s.timestamp);
    w.raw(s.ai_id.digest);
    w.u8(static_cast<std::uint8_t>(s.new_status));
    w.raw(s.authority_public_key);
    w.raw(s.authority_signature);
  }
}

LedgerEvent decode_event(ByteReader& in) {
  std::size_t at = in.offset();
  std::uint8_t tag = in.u8();
  std::uint64_t ts = in.u64();
  if (tag == kRegisterTag) {
    PrimaryIdentifier id{in.fixed<32>()};
    std::size_t sec_at = in.offset();
    std::string sec = as_text(in.var16());
    std::size_t ns_at = in.offset();
    std::string ns = as_text(in.var16());
    SecondaryIdentifier sid;
    try {
      sid = parse_secondary_id(sec, true);
    } catch (const IdentifierError& e) {
      throw DecodeError(sec_at, std::string("secondary id: ") + e.what());
    }
    if (!IssuerNamespace::is_valid(ns)) throw DecodeError(ns_at, "invalid namespace");
    RegistryEntry e{id, sid, IssuerNamespace(ns)};
    e.zkp_anchor = in.fixed<32>();
    e.metadata_digest = in.fixed<32>();
    e.developer_public_key = in.fixed<32>();
    e.developer_signature = in.fixed<64>();
    e.registered_at = in.u64();
    return RegisterEvent{ts, std::move(e)};
  }
  if (tag == kStatusTag) {
    StatusUpdate s;
    s.timestamp = ts;
    s.ai_id.digest = in.fixed<32>();
    std::size_t st_at = in.offset();
    try {
      s.new_status = status_from_char(static_cast<char>(in.u8()));
    } catch (const std::invalid_argument&) {
      throw DecodeError(st_at, "invalid status code");
    }
    s.authority_public_key = in.fixed<32>();
    s.authority_signature = in.fixed<64>();
    return s;
  }
  throw DecodeError(at, "unknown event kind " + std::to_string(tag));
}

}  // namespace

char to_char(TestingStatus s) { return static_cast<char>(s); }

TestingStatus status_from_char(char c) {
  switch (c) {
    case 'U': return TestingStatus::U;
    case 'P': return TestingStatus::P;
    case 'F': return TestingStatus::F;
    case 'X': return TestingStatus::X;
  }
  throw std::invalid_argument("status must be one of U, P, F, X");
}

bool transition_allowed(TestingStatus from, TestingStatus to) {
  using S = TestingStatus;
  return (from == S::U && (to == S::P || to == S::F)) || (from == S::P && (to == S::F || to == S::X)) ||
         (from == S::F && to == S::X);
}

Bytes entry_signing_bytes(const RegistryEntry& e) {
  ByteWriter w;
  encode_entry_fields(w, e, false);
  return std::move(w).take();
}

Bytes status_signing_bytes(const PrimaryIdentifier& id, TestingStatus s, std::uint64_t timestamp) {
  ByteWriter w;
  w.raw(id.digest);
  w.u8(static_cast<std::uint8_t>(s));
  w.u64(timestamp);
  return std::move(w).take();
}

Bytes block_body_bytes(const LedgerBlock& b) {
  ByteWriter w;
  w.u64(b.index);
  w.raw(b.prev_block_hash);
  w.u64(b.timestamp);
  w.u32(static_cast<std::uint32_t>(b.events.size()));
  for (const auto& ev : b.events) encode_event(w, ev);
  return std::move(w).take();
}

Bytes encode_block(const LedgerBlock& b) {
  Bytes out = block_body_bytes(b);
  out.insert(out.end(), b.block_hash.begin(), b.block_hash.end());
  return out;
}

LedgerBlock decode_block(ByteReader& in) {
  LedgerBlock b;
  b.index = in.u64();
  b.prev_block_hash = in.fixed<32>();
  b.timestamp = in.u64();
  std::uint32_t count = in.u32();
  // Smallest event (status update) is 114 bytes.
  if (static_cast<std::uint64_t>(count) * 114 > in.remaining()) throw DecodeError(in.offset(), "event count exceeds data");
  b.events.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) b.events.push_back(decode_event(in));
  b.block_hash = in.fixed<32>();
  return b;
}

ChainCheck verify_chain_bytes(ByteView file) {
  ByteReader in(file);
  Digest prev{};
  std::uint64_t index = 0;
  if (in.done()) return {false, 0, "missing genesis block"};
  while (!in.done()) {
    LedgerBlock b;
    try {
      b = decode_block(in);
    } catch (const DecodeError& e) {
      return {false, index, std::string("undecodable block: ") + e.what()};
    }
    if (b.index != index) return {false, index, "block index " + std::to_string(b.index) + " out of sequence"};
    if (b.prev_block_hash != prev) return {false, index, "previous-hash link broken"};
    if (index == 0 && !b.events.empty()) return {false, 0, "genesis block carries events"};
    if (index > 0 && b.events.size() != 1) return {false, index, "block must seal exactly one event"};
    if (crypto::sha256(block_body_bytes(b)) != b.block_hash) return {false, index, "block hash mismatch"};
    prev = b.block_hash;
    ++index;
  }
  return {};
}

std::uint64_t system_clock_seconds() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

Ledger::Ledger(Options opts) : opts_(std::move(opts)) {
  if (!opts_.clock) opts_.clock = system_clock_seconds;
  Bytes existing;
  if (!opts_.path.empty() && std::filesystem::exists(opts_.path)) {
    std::ifstream f(opts_.path, std::ios::binary);
    if (!f) throw LedgerError(LedgerError::Kind::io, "cannot read " + opts_.path.string());
    existing.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }

  if (!existing.empty()) {
    auto check = verify_chain_bytes(existing);
    if (!check.ok) {
      throw LedgerError(LedgerError::Kind::corrupt,
                        "ledger invalid at block " + std::to_string(check.first_invalid) + ": " + check.reason);
    }
    ByteReader in(existing);
    while (!in.done()) {
      std::size_t start = in.offset();
      LedgerBlock b = decode_block(in);
      try {
        for (const auto& ev : b.events) apply(ev, b.index, false);
      } catch (const LedgerError& e) {
        throw LedgerError(LedgerError::Kind::corrupt,
                          "replay failed at block " + std::to_string(b.index) + ": " + e.what());
      }
      blocks_.emplace_back(existing.begin() + static_cast<long>(start), existing.begin() + static_cast<long>(in.offset()));
      head_hash_ = b.block_hash;
    }
  }

  if (!opts_.path.empty()) {
    file_.open(opts_.path, std::ios::binary | std::ios::app);
    if (!file_) throw LedgerError(LedgerError::Kind::io, "cannot open " + opts_.path.string() + " for append");
  }
  if (blocks_.empty()) {
    LedgerBlock genesis;
    genesis.timestamp = opts_.clock();
    seal(std::move(genesis));
  }
}

void Ledger::seal(LedgerBlock block) {
  block.index = blocks_.size();
  block.prev_block_hash = head_hash_;
  block.block_hash = crypto::sha256(block_body_bytes(block));
  Bytes raw = encode_block(block);
  if (file_.is_open()) {
    file_.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    file_.flush();
    if (!file_) throw LedgerError(LedgerError::Kind::io, "append to ledger file failed");
  }
  head_hash_ = block.block_hash;
  blocks_.push_back(std::move(raw));
}

void Ledger::validate_register(const RegistryEntry& e) const {
  if (records_.count(e.ai_id)) throw LedgerError(LedgerError::Kind::duplicate, "AI-ID already registered: " + e.ai_id.hex());
  if (e.secondary_id.owner_id != e.ns.text()) {
    throw LedgerError(LedgerError::Kind::malformed, "secondary id owner does not match namespace");
  }
  try {
    parse_secondary_id(e.secondary_id.render(), true);
  } catch (const IdentifierError& ex) {
    throw LedgerError(LedgerError::Kind::malformed, std::string("secondary id: ") + ex.what());
  }
  if (!crypto::verify(e.developer_public_key, entry_signing_bytes(e), e.developer_signature)) {
    throw LedgerError(LedgerError::Kind::invalid_signature, "developer signature does not verify");
  }
}

void Ledger::validate_status(const StatusUpdate& u, bool check_authority) const {
  auto it = records_.find(u.ai_id);
  if (it == records_.end()) throw LedgerError(LedgerError::Kind::unknown_id, "unknown AI-ID " + u.ai_id.hex());
  if (check_authority) {
    bool known = false;
    for (const auto& k : opts_.authorities) known = known || k == u.authority_public_key;
    if (!known) throw LedgerError(LedgerError::Kind::unauthorized, "signer is not a configured authority");
  }
  if (!crypto::verify(u.authority_public_key, status_signing_bytes(u.ai_id, u.new_status, u.timestamp),
                      u.authority_signature)) {
    throw LedgerError(LedgerError::Kind::invalid_signature, "authority signature does not verify");
  }
  TestingStatus cur = it->second.trail.back().status;
  if (!transition_allowed(cur, u.new_status)) {
    throw LedgerError(LedgerError::Kind::illegal_transition,
                      std::string("illegal transition ") + to_char(cur) + "->" + to_char(u.new_status));
  }
}

void Ledger::apply(const LedgerEvent& ev, std::uint64_t block_index, bool check_authority) {
  if (const auto* r = std::get_if<RegisterEvent>(&ev)) {
    validate_register(r->entry);
    records_.emplace(r->entry.ai_id, Record{r->entry, {{TestingStatus::U, r->timestamp, block_index}}});
  } else {
    const auto& s = std::get<StatusUpdate>(ev);
    validate_status(s, check_authority);
    records_.at(s.ai_id).trail.push_back({s.new_status, s.timestamp, block_index});
  }
}

LedgerBlock Ledger::append_register(const RegistryEntry& entry) {
  std::unique_lock lock(mu_);
  validate_register(entry);
  LedgerBlock b;
  b.timestamp = opts_.clock();
  b.events.push_back(RegisterEvent{b.timestamp, entry});
  seal(b);
  apply(b.events.front(), blocks_.size() - 1, false);
  ByteReader in(blocks_.back());
  return decode_block(in);
}

LedgerBlock Ledger::append_status(const StatusUpdate& update) {
  std::unique_lock lock(mu_);
  validate_status(update, true);
  LedgerBlock b;
  b.timestamp = opts_.clock();
  b.events.push_back(update);
  seal(b);
  apply(b.events.front(), blocks_.size() - 1, false);
  ByteReader in(blocks_.back());
  return decode_block(in);
}

std::pair<RegistryEntry, TestingStatus> Ledger::lookup(const PrimaryIdentifier& id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) throw LedgerError(LedgerError::Kind::unknown_id, "unknown AI-ID " + id.hex());
  return {it->second.entry, it->second.trail.back().status};
}

bool Ledger::contains(const PrimaryIdentifier& id) const {
  std::shared_lock lock(mu_);
  return records_.count(id) != 0;
}

std::vector<HistoryItem> Ledger::history(const PrimaryIdentifier& id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) throw LedgerError(LedgerError::Kind::unknown_id, "unknown AI-ID " + id.hex());
  return it->second.trail;
}

ChainCheck Ledger::verify_chain() const {
  std::shared_lock lock(mu_);
  Bytes all;
  for (const auto& b : blocks_) all.insert(all.end(), b.begin(), b.end());
  return verify_chain_bytes(all);
}

std::vector<Bytes> Ledger::block_bytes(std::uint64_t from) const {
  std::shared_lock lock(mu_);
  if (from > blocks_.size()) throw std::out_of_range("block index beyond head");
  return {blocks_.begin() + static_cast<long>(from), blocks_.end()};
}

std::uint64_t Ledger::height() const {
  std::shared_lock lock(mu_);
  return blocks_.size();
}

}  // namespace aiid::ledger
