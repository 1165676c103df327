#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aiid/bytes.hpp"
#include "aiid/crypto.hpp"
#include "aiid/identity.hpp"

// Zero-knowledge proof that the prover knows H_w with
//   AI-ID = SHA-256(namespace || H_w)
// without revealing it. ZKBoo-style MPC-in-the-head: the prover simulates a
// 3-party XOR-shared evaluation of the one-block SHA-256 circuit, commits to
// every party's view, and opens two of three views per round as selected by
// a Fiat-Shamir hash that also absorbs a verifier nonce.
namespace aiid::zk {

inline constexpr std::uint16_t kDefaultRounds = 69;
inline constexpr std::string_view kProofSystemTag = "ZKB-SHA256-V1";

using Seed = std::array<std::uint8_t, 16>;
using Nonce = std::array<std::uint8_t, 32>;

struct PossessionStatement {
  PrimaryIdentifier ai_id;
  IssuerNamespace ns;
  std::uint16_t rounds = kDefaultRounds;
  Nonce challenge_nonce{};
};

struct PossessionWitness {
  Commitment h;
};

// Binds the proof-system parameters recorded with a registry entry:
// SHA-256(tag || rounds as u16 LE).
Digest zkp_anchor(std::uint16_t rounds = kDefaultRounds);

// One opened party view. The verifier re-derives the view of the first opened
// party from both seeds and shares; the second party's gate outputs are taken
// as communicated.
struct OpenedView {
  Seed seed{};
  Digest input_share{};
  Digest output_share{};
  Digest blinding{};
  std::vector<std::uint32_t> gate_outputs;

  bool operator==(const OpenedView&) const = default;
};

struct RoundProof {
  std::uint8_t challenge = 0;  // opened parties are challenge and challenge+1 (mod 3)
  std::array<Digest, 3> commitments{};
  std::array<OpenedView, 2> opened;

  bool operator==(const RoundProof&) const = default;
};

struct PossessionProof {
  std::vector<RoundProof> rounds;

  bool operator==(const PossessionProof&) const = default;
};

// "ZKP1" | rounds u16 | per round: challenge u8, 3 x commitment,
// 2 x (seed, input share, output share, blinding, u32 byte length, gate words LE)
Bytes serialize_proof(const PossessionProof& p);
PossessionProof parse_proof(ByteView bytes);

// One-block SHA-256 of namespace || h, evaluated through the circuit.
Digest circuit_eval(const IssuerNamespace& ns, const Commitment& h);

class WitnessMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Source of prover randomness (seeds and blinding). Defaults to the system CSPRNG.
using RandomFill = std::function<void(std::span<std::uint8_t>)>;

// Throws WitnessMismatch if circuit_eval(st.ns, w.h) != st.ai_id; no proof is produced.
PossessionProof prove(const PossessionStatement& st, const PossessionWitness& w,
                      const RandomFill& rng = crypto::random_bytes);

enum class Failure {
  none,
  malformed,
  parameter_mismatch,
  challenge_mismatch,
  commitment_mismatch,
  gate_inconsistency,
  output_mismatch,
};

const char* to_string(Failure f);

struct VerifyResult {
  Failure failure = Failure::none;
  std::optional<std::size_t> round;
  std::string detail;

  bool accepted() const { return failure == Failure::none; }
};

VerifyResult verify(const PossessionStatement& st, const PossessionProof& proof);
// Parses then verifies; parse failures reject as malformed.
VerifyResult verify_bytes(const PossessionStatement& st, ByteView proof_bytes);

// Trusted-intermediary baseline: the attestor sees H_w, recomputes the
// AI-ID and signs (ai_id || timestamp || "POSSESSION-OK").
struct Attestation {
  PrimaryIdentifier ai_id;
  crypto::PublicKey attestor_public_key{};
  std::uint64_t timestamp = 0;
  crypto::Signature attestor_signature{};
};

Bytes attestation_message(const PrimaryIdentifier& ai_id, std::uint64_t timestamp);
Attestation attest(const PossessionStatement& st, const PossessionWitness& w,
                   const crypto::SecretKey& attestor_key, std::uint64_t timestamp);
bool verify_attestation(const Attestation& a);

}  // namespace aiid::zk
