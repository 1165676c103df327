#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <variant>
#include <vector>

#include "aiid/bytes.hpp"
#include "aiid/crypto.hpp"
#include "aiid/identity.hpp"

// Append-only, hash-chained registry log. One block per accepted event;
// block 0 is an empty genesis block.
//
// Block encoding (the ledger file is these, back to back):
//   index u64 | prev_block_hash 32 | timestamp u64 | event_count u32 |
//   events | block_hash 32
// where block_hash = SHA-256 of everything before it in the block.
namespace aiid::ledger {

enum class TestingStatus : std::uint8_t { U = 'U', P = 'P', F = 'F', X = 'X' };

char to_char(TestingStatus s);
TestingStatus status_from_char(char c);  // throws std::invalid_argument
// Exactly U->P, U->F, P->F, P->X, F->X.
bool transition_allowed(TestingStatus from, TestingStatus to);

struct RegistryEntry {
  PrimaryIdentifier ai_id;
  SecondaryIdentifier secondary_id;
  IssuerNamespace ns;
  Digest zkp_anchor{};
  Digest metadata_digest{};
  crypto::PublicKey developer_public_key{};
  crypto::Signature developer_signature{};
  std::uint64_t registered_at = 0;
};

// Canonical entry encoding without the signature; what the developer signs.
Bytes entry_signing_bytes(const RegistryEntry& e);

struct StatusUpdate {
  PrimaryIdentifier ai_id;
  TestingStatus new_status = TestingStatus::U;
  std::uint64_t timestamp = 0;
  crypto::PublicKey authority_public_key{};
  crypto::Signature authority_signature{};
};

// ai_id || status byte || timestamp u64 LE
Bytes status_signing_bytes(const PrimaryIdentifier& id, TestingStatus s, std::uint64_t timestamp);

struct RegisterEvent {
  std::uint64_t timestamp = 0;
  RegistryEntry entry;
};

using LedgerEvent = std::variant<RegisterEvent, StatusUpdate>;

struct LedgerBlock {
  std::uint64_t index = 0;
  Digest prev_block_hash{};
  std::uint64_t timestamp = 0;
  std::vector<LedgerEvent> events;
  Digest block_hash{};
};

// Encoding of every field but block_hash.
Bytes block_body_bytes(const LedgerBlock& b);
Bytes encode_block(const LedgerBlock& b);
LedgerBlock decode_block(ByteReader& in);

struct ChainCheck {
  bool ok = true;
  std::uint64_t first_invalid = 0;
  std::string reason;
};

// Structural and hash-link verification of raw ledger bytes.
ChainCheck verify_chain_bytes(ByteView file);

class LedgerError : public std::runtime_error {
 public:
  enum class Kind {
    duplicate,
    invalid_signature,
    malformed,
    unknown_id,
    illegal_transition,
    unauthorized,
    corrupt,
    io,
  };
  LedgerError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct HistoryItem {
  TestingStatus status;
  std::uint64_t timestamp;
  std::uint64_t block_index;
};

using Clock = std::function<std::uint64_t()>;
std::uint64_t system_clock_seconds();

// Single writer, many readers. Sealed blocks never change.
class Ledger {
 public:
  struct Options {
    std::filesystem::path path;  // empty: in-memory only
    std::vector<crypto::PublicKey> authorities;
    Clock clock = system_clock_seconds;
  };

  // Opens (and fully replays) an existing ledger file or starts a new one
  // with a genesis block. Throws LedgerError::corrupt on any inconsistency.
  explicit Ledger(Options opts);
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  LedgerBlock append_register(const RegistryEntry& entry);
  LedgerBlock append_status(const StatusUpdate& update);

  std::pair<RegistryEntry, TestingStatus> lookup(const PrimaryIdentifier& id) const;
  bool contains(const PrimaryIdentifier& id) const;
  std::vector<HistoryItem> history(const PrimaryIdentifier& id) const;

  ChainCheck verify_chain() const;

  // Canonical bytes of blocks [from, height). from == height yields an empty
  // list; from > height throws std::out_of_range.
  std::vector<Bytes> block_bytes(std::uint64_t from) const;
  std::uint64_t height() const;

 private:
  struct Record {
    RegistryEntry entry;
    std::vector<HistoryItem> trail;
  };

  void seal(LedgerBlock block);
  // Validates and applies an event to the index; used for appends and replay.
  void apply(const LedgerEvent& ev, std::uint64_t block_index, bool check_authority);
  void validate_register(const RegistryEntry& e) const;
  void validate_status(const StatusUpdate& u, bool check_authority) const;

  Options opts_;
  mutable std::shared_mutex mu_;
  std::vector<Bytes> blocks_;
  Digest head_hash_{};
  std::map<PrimaryIdentifier, Record> records_;
  std::ofstream file_;
};

}  // namespace aiid::ledger
