#include "aiid/possession.hpp"

#include <algorithm>

#include "aiid/sha256_circuit.hpp"

namespace aiid::zk {

namespace {

// Bytes of tape each party consumes: a 32-byte input share slot followed by
// one word of randomness per nonlinear gate.
constexpr std::size_t kShareBytes = 32;
constexpr std::size_t kTapeBytes = kShareBytes + 4 * kNonlinearWords;

// Random tape: SHA-256(seed || counter u32 LE) blocks, concatenated.
class Tape {
 public:
  explicit Tape(const Seed& seed) : bytes_(kTapeBytes) {
    for (std::uint32_t ctr = 0; ctr * 32 < kTapeBytes; ++ctr) {
      ByteWriter w;
      w.raw(seed);
      w.u32(ctr);
      Digest block = crypto::sha256(w.bytes());
      std::size_t at = ctr * 32u;
      std::copy_n(block.begin(), std::min<std::size_t>(32, kTapeBytes - at), bytes_.begin() + static_cast<long>(at));
    }
  }

  Digest share() const {
    Digest d{};
    std::copy_n(bytes_.begin(), kShareBytes, d.begin());
    return d;
  }

  std::uint32_t next_word() {
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }

 private:
  Bytes bytes_;
  std::size_t pos_ = kShareBytes;
};

inline std::uint32_t bit(std::uint32_t w, int k) { return (w >> k) & 1u; }
inline std::uint32_t rotr(std::uint32_t a, int n) { return a >> n | a << (32 - n); }

std::uint32_t load_be(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
         static_cast<std::uint32_t>(p[2]) << 8 | p[3];
}

void store_be(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

// Full 3-party simulation. Party i's AND output is
//   z_i = x_i y_i ^ x_{i+1} y_i ^ x_i y_{i+1} ^ r_i ^ r_{i+1}
// which XORs to x y across parties. Additions ripple the carry bit by bit
// with the same rule; the carry word is the party's view entry.
class ProverEngine {
 public:
  using Word = std::array<std::uint32_t, 3>;

  ProverEngine(std::array<Tape, 3>& tapes, std::array<std::vector<std::uint32_t>, 3>& views)
      : tapes_(tapes), views_(views) {}

  Word constant(std::uint32_t v) const { return {v, 0, 0}; }
  Word xor_(const Word& a, const Word& b) const { return {a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2]}; }
  Word rotr(const Word& a, int n) const { return {zk::rotr(a[0], n), zk::rotr(a[1], n), zk::rotr(a[2], n)}; }
  Word shr(const Word& a, int n) const { return {a[0] >> n, a[1] >> n, a[2] >> n}; }

  Word and_(const Word& x, const Word& y) {
    std::array<std::uint32_t, 3> r{tapes_[0].next_word(), tapes_[1].next_word(), tapes_[2].next_word()};
    Word z;
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3;
      z[i] = (x[i] & y[i]) ^ (x[j] & y[i]) ^ (x[i] & y[j]) ^ r[i] ^ r[j];
      views_[i].push_back(z[i]);
    }
    return z;
  }

  Word add(const Word& x, const Word& y) {
    std::array<std::uint32_t, 3> r{tapes_[0].next_word(), tapes_[1].next_word(), tapes_[2].next_word()};
    Word c{0, 0, 0};
    for (int k = 0; k < 31; ++k) {
      std::uint32_t a[3], b[3];
      for (int i = 0; i < 3; ++i) {
        a[i] = bit(x[i] ^ c[i], k);
        b[i] = bit(y[i] ^ c[i], k);
      }
      for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3;
        std::uint32_t t = (a[i] & b[j]) ^ (a[j] & b[i]) ^ (a[i] & b[i]) ^ bit(c[i], k) ^ bit(r[i], k) ^ bit(r[j], k);
        c[i] |= t << (k + 1);
      }
    }
    Word z;
    for (int i = 0; i < 3; ++i) {
      views_[i].push_back(c[i]);
      z[i] = x[i] ^ y[i] ^ c[i];
    }
    return z;
  }

 private:
  std::array<Tape, 3>& tapes_;
  std::array<std::vector<std::uint32_t>, 3>& views_;
};

// Replays parties e (slot 0) and e+1 (slot 1). Slot 1's nonlinear outputs come
// from its opened view; slot 0's are recomputed and collected for comparison.
class VerifierEngine {
 public:
  using Word = std::array<std::uint32_t, 2>;

  VerifierEngine(int first_party, std::array<Tape, 2>& tapes, const std::vector<std::uint32_t>& second_view,
                 std::vector<std::uint32_t>& first_recomputed)
      : first_party_(first_party), tapes_(tapes), second_view_(second_view), recomputed_(first_recomputed) {}

  Word constant(std::uint32_t v) const {
    return {first_party_ == 0 ? v : 0u, (first_party_ + 1) % 3 == 0 ? v : 0u};
  }
  Word xor_(const Word& a, const Word& b) const { return {a[0] ^ b[0], a[1] ^ b[1]}; }
  Word rotr(const Word& a, int n) const { return {zk::rotr(a[0], n), zk::rotr(a[1], n)}; }
  Word shr(const Word& a, int n) const { return {a[0] >> n, a[1] >> n}; }

  Word and_(const Word& x, const Word& y) {
    std::uint32_t r0 = tapes_[0].next_word(), r1 = tapes_[1].next_word();
    std::uint32_t z0 = (x[0] & y[0]) ^ (x[1] & y[0]) ^ (x[0] & y[1]) ^ r0 ^ r1;
    recomputed_.push_back(z0);
    return {z0, second_view_[next_++]};
  }

  Word add(const Word& x, const Word& y) {
    std::uint32_t r0 = tapes_[0].next_word(), r1 = tapes_[1].next_word();
    std::uint32_t c1 = second_view_[next_++];
    std::uint32_t c0 = 0;
    for (int k = 0; k < 31; ++k) {
      std::uint32_t a0 = bit(x[0] ^ c0, k), b0 = bit(y[0] ^ c0, k);
      std::uint32_t a1 = bit(x[1] ^ c1, k), b1 = bit(y[1] ^ c1, k);
      std::uint32_t t = (a0 & b1) ^ (a1 & b0) ^ (a0 & b0) ^ bit(c0, k) ^ bit(r0, k) ^ bit(r1, k);
      c0 |= t << (k + 1);
    }
    recomputed_.push_back(c0);
    return {x[0] ^ y[0] ^ c0, x[1] ^ y[1] ^ c1};
  }

 private:
  int first_party_;
  std::array<Tape, 2>& tapes_;
  const std::vector<std::uint32_t>& second_view_;
  std::vector<std::uint32_t>& recomputed_;
  std::size_t next_ = 0;
};

// Message block for namespace (8 bytes) || h (32 bytes): words 0-1 public,
// 2-9 secret, then the padding for a 320-bit message.
template <class Engine>
std::array<typename Engine::Word, 16> message_block(Engine& g, const IssuerNamespace& ns,
                                                    const std::array<typename Engine::Word, 8>& secret) {
  std::array<typename Engine::Word, 16> block;
  const auto* nsb = reinterpret_cast<const std::uint8_t*>(ns.text().data());
  block[0] = g.constant(load_be(nsb));
  block[1] = g.constant(load_be(nsb + 4));
  for (int i = 0; i < 8; ++i) block[2 + i] = secret[i];
  block[10] = g.constant(0x80000000u);
  for (int i = 11; i < 15; ++i) block[i] = g.constant(0);
  block[15] = g.constant(40 * 8);
  return block;
}

std::array<std::uint32_t, 8> words_of(const Digest& d) {
  std::array<std::uint32_t, 8> w{};
  for (int i = 0; i < 8; ++i) w[i] = load_be(d.data() + 4 * i);
  return w;
}

Digest bytes_of(const std::array<std::uint32_t, 8>& w) {
  Digest d{};
  for (int i = 0; i < 8; ++i) store_be(w[i], d.data() + 4 * i);
  return d;
}

Digest xor_digest(const Digest& a, const Digest& b) {
  Digest out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

Digest view_commitment(const Seed& seed, const Digest& input_share, const std::vector<std::uint32_t>& gates,
                       const Digest& output_share, const Digest& blinding) {
  ByteWriter w;
  w.raw(seed);
  w.raw(input_share);
  for (auto g : gates) w.u32(g);
  w.raw(output_share);
  w.raw(blinding);
  return crypto::sha256(w.bytes());
}

Bytes statement_bytes(const PossessionStatement& st) {
  ByteWriter w;
  w.raw(kProofSystemTag);
  w.raw(st.ai_id.digest);
  w.raw(st.ns.text());
  w.u16(st.rounds);
  return std::move(w).take();
}

// Fiat-Shamir: hash the statement, nonce, and every round's view commitments
// and declared output shares, then expand into trits by rejection sampling.
std::vector<std::uint8_t> derive_challenges(const PossessionStatement& st,
                                            const std::vector<std::array<Digest, 3>>& commitments,
                                            const std::vector<std::array<Digest, 3>>& outputs) {
  crypto::Sha256 h;
  h.update(statement_bytes(st));
  h.update(st.challenge_nonce);
  for (std::size_t j = 0; j < commitments.size(); ++j) {
    for (const auto& c : commitments[j]) h.update(c);
    for (const auto& y : outputs[j]) h.update(y);
  }
  Digest root = h.finish();

  std::vector<std::uint8_t> trits;
  trits.reserve(commitments.size());
  for (std::uint32_t ctr = 0; trits.size() < commitments.size(); ++ctr) {
    ByteWriter w;
    w.raw(root);
    w.u32(ctr);
    for (auto b : crypto::sha256(w.bytes())) {
      if (b == 255) continue;
      trits.push_back(static_cast<std::uint8_t>(b % 3));
      if (trits.size() == commitments.size()) break;
    }
  }
  return trits;
}

}  // namespace

Digest zkp_anchor(std::uint16_t rounds) {
  ByteWriter w;
  w.raw(kProofSystemTag);
  w.u16(rounds);
  return crypto::sha256(w.bytes());
}

Digest circuit_eval(const IssuerNamespace& ns, const Commitment& h) {
  PlainEngine g;
  return bytes_of(compress_block(g, message_block(g, ns, words_of(h.digest))));
}

PossessionProof prove(const PossessionStatement& st, const PossessionWitness& w, const RandomFill& rng) {
  if (st.rounds < 1) throw std::invalid_argument("round count must be at least 1");
  if (circuit_eval(st.ns, w.h) != st.ai_id.digest) {
    throw WitnessMismatch("witness does not hash to the stated AI-ID under this namespace");
  }

  struct RoundState {
    std::array<Seed, 3> seeds{};
    std::array<Digest, 3> blinding{};
    std::array<Digest, 3> inputs{};
    std::array<Digest, 3> outputs{};
    std::array<std::vector<std::uint32_t>, 3> views;
  };
  std::vector<RoundState> state(st.rounds);
  std::vector<std::array<Digest, 3>> commitments(st.rounds), outputs(st.rounds);

  for (std::size_t j = 0; j < st.rounds; ++j) {
    auto& rs = state[j];
    for (int i = 0; i < 3; ++i) {
      rng(rs.seeds[i]);
      rng(rs.blinding[i]);
    }
    std::array<Tape, 3> tapes{Tape(rs.seeds[0]), Tape(rs.seeds[1]), Tape(rs.seeds[2])};
    rs.inputs[0] = tapes[0].share();
    rs.inputs[1] = tapes[1].share();
    rs.inputs[2] = xor_digest(xor_digest(w.h.digest, rs.inputs[0]), rs.inputs[1]);

    std::array<std::array<std::uint32_t, 8>, 3> in{words_of(rs.inputs[0]), words_of(rs.inputs[1]),
                                                   words_of(rs.inputs[2])};
    std::array<ProverEngine::Word, 8> secret;
    for (int k = 0; k < 8; ++k) secret[k] = {in[0][k], in[1][k], in[2][k]};

    for (auto& v : rs.views) v.reserve(kNonlinearWords);
    ProverEngine g(tapes, rs.views);
    auto out = compress_block(g, message_block(g, st.ns, secret));
    for (int i = 0; i < 3; ++i) {
      std::array<std::uint32_t, 8> share{};
      for (int k = 0; k < 8; ++k) share[k] = out[k][i];
      rs.outputs[i] = bytes_of(share);
      commitments[j][i] = view_commitment(rs.seeds[i], rs.inputs[i], rs.views[i], rs.outputs[i], rs.blinding[i]);
    }
    outputs[j] = rs.outputs;
  }

  auto trits = derive_challenges(st, commitments, outputs);

  PossessionProof proof;
  proof.rounds.resize(st.rounds);
  for (std::size_t j = 0; j < st.rounds; ++j) {
    auto& rp = proof.rounds[j];
    auto& rs = state[j];
    rp.challenge = trits[j];
    rp.commitments = commitments[j];
    for (int s = 0; s < 2; ++s) {
      int p = (trits[j] + s) % 3;
      rp.opened[s] = {rs.seeds[p], rs.inputs[p], rs.outputs[p], rs.blinding[p], std::move(rs.views[p])};
    }
  }
  return proof;
}

const char* to_string(Failure f) {
  switch (f) {
    case Failure::none: return "none";
    case Failure::malformed: return "malformed";
    case Failure::parameter_mismatch: return "parameter mismatch";
    case Failure::challenge_mismatch: return "challenge mismatch";
    case Failure::commitment_mismatch: return "commitment mismatch";
    case Failure::gate_inconsistency: return "gate inconsistency";
    case Failure::output_mismatch: return "output mismatch";
  }
  return "unknown";
}

VerifyResult verify(const PossessionStatement& st, const PossessionProof& proof) {
  auto reject = [](Failure f, std::optional<std::size_t> round, std::string detail) {
    return VerifyResult{f, round, std::move(detail)};
  };

  if (proof.rounds.size() != st.rounds) {
    return reject(Failure::parameter_mismatch, std::nullopt,
                  "proof has " + std::to_string(proof.rounds.size()) + " rounds, statement requires " +
                      std::to_string(st.rounds));
  }
  for (std::size_t j = 0; j < proof.rounds.size(); ++j) {
    const auto& rp = proof.rounds[j];
    if (rp.challenge > 2) return reject(Failure::malformed, j, "challenge out of range");
    for (const auto& v : rp.opened) {
      if (v.gate_outputs.size() != kNonlinearWords) return reject(Failure::malformed, j, "wrong gate output count");
    }
  }

  // The unopened party's output share is whatever completes the XOR to the AI-ID.
  std::vector<std::array<Digest, 3>> commitments(st.rounds), outputs(st.rounds);
  for (std::size_t j = 0; j < st.rounds; ++j) {
    const auto& rp = proof.rounds[j];
    commitments[j] = rp.commitments;
    int e = rp.challenge;
    outputs[j][e] = rp.opened[0].output_share;
    outputs[j][(e + 1) % 3] = rp.opened[1].output_share;
    outputs[j][(e + 2) % 3] =
        xor_digest(xor_digest(st.ai_id.digest, rp.opened[0].output_share), rp.opened[1].output_share);
  }
  auto trits = derive_challenges(st, commitments, outputs);
  for (std::size_t j = 0; j < st.rounds; ++j) {
    if (trits[j] != proof.rounds[j].challenge) {
      return reject(Failure::challenge_mismatch, j, "Fiat-Shamir challenge does not match transcript");
    }
  }

  std::vector<std::uint32_t> recomputed;
  recomputed.reserve(kNonlinearWords);
  for (std::size_t j = 0; j < st.rounds; ++j) {
    const auto& rp = proof.rounds[j];
    const int e = rp.challenge;
    std::array<Tape, 2> tapes{Tape(rp.opened[0].seed), Tape(rp.opened[1].seed)};
    for (int s = 0; s < 2; ++s) {
      int p = (e + s) % 3;
      if (p < 2 && rp.opened[s].input_share != tapes[s].share()) {
        return reject(Failure::gate_inconsistency, j, "input share of party " + std::to_string(p) + " not derived from its tape");
      }
    }

    auto in0 = words_of(rp.opened[0].input_share);
    auto in1 = words_of(rp.opened[1].input_share);
    std::array<VerifierEngine::Word, 8> secret;
    for (int k = 0; k < 8; ++k) secret[k] = {in0[k], in1[k]};

    recomputed.clear();
    VerifierEngine g(e, tapes, rp.opened[1].gate_outputs, recomputed);
    auto out = compress_block(g, message_block(g, st.ns, secret));

    if (recomputed != rp.opened[0].gate_outputs) {
      auto mm = std::mismatch(recomputed.begin(), recomputed.end(), rp.opened[0].gate_outputs.begin());
      return reject(Failure::gate_inconsistency, j,
                    "party " + std::to_string(e) + " gate " + std::to_string(mm.first - recomputed.begin()) +
                        " disagrees with replay");
    }

    for (int s = 0; s < 2; ++s) {
      std::array<std::uint32_t, 8> share{};
      for (int k = 0; k < 8; ++k) share[k] = out[k][s];
      if (bytes_of(share) != rp.opened[s].output_share) {
        return reject(Failure::output_mismatch, j, "output share of party " + std::to_string((e + s) % 3) + " inconsistent");
      }
    }

    for (int s = 0; s < 2; ++s) {
      const auto& v = rp.opened[s];
      int p = (e + s) % 3;
      if (view_commitment(v.seed, v.input_share, v.gate_outputs, v.output_share, v.blinding) != rp.commitments[p]) {
        return reject(Failure::commitment_mismatch, j, "view commitment of party " + std::to_string(p) + " does not open");
      }
    }
  }
  return {};
}

VerifyResult verify_bytes(const PossessionStatement& st, ByteView proof_bytes) {
  PossessionProof proof;
  try {
    proof = parse_proof(proof_bytes);
  } catch (const std::exception& ex) {
    return {Failure::malformed, std::nullopt, ex.what()};
  }
  return verify(st, proof);
}

Bytes serialize_proof(const PossessionProof& p) {
  if (p.rounds.size() > 0xffff) throw std::length_error("too many rounds");
  ByteWriter w;
  w.raw(std::string_view("ZKP1"));
  w.u16(static_cast<std::uint16_t>(p.rounds.size()));
  for (const auto& r : p.rounds) {
    w.u8(r.challenge);
    for (const auto& c : r.commitments) w.raw(c);
    for (const auto& v : r.opened) {
      w.raw(v.seed);
      w.raw(v.input_share);
      w.raw(v.output_share);
      w.raw(v.blinding);
      w.u32(static_cast<std::uint32_t>(v.gate_outputs.size() * 4));
      for (auto g : v.gate_outputs) w.u32(g);
    }
  }
  return std::move(w).take();
}

PossessionProof parse_proof(ByteView bytes) {
  ByteReader in(bytes);
  auto magic = in.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "ZKP1") {
    throw DecodeError(0, "bad proof magic (expected ZKP1)");
  }
  std::uint16_t rounds = in.u16();
  PossessionProof p;
  p.rounds.resize(rounds);
  for (auto& r : p.rounds) {
    std::size_t at = in.offset();
    r.challenge = in.u8();
    if (r.challenge > 2) throw DecodeError(at, "challenge trit out of range");
    for (auto& c : r.commitments) c = in.fixed<32>();
    for (auto& v : r.opened) {
      v.seed = in.fixed<16>();
      v.input_share = in.fixed<32>();
      v.output_share = in.fixed<32>();
      v.blinding = in.fixed<32>();
      at = in.offset();
      std::uint32_t len = in.u32();
      if (len != 4 * kNonlinearWords) throw DecodeError(at, "unexpected gate output length " + std::to_string(len));
      v.gate_outputs.resize(kNonlinearWords);
      for (auto& g : v.gate_outputs) g = in.u32();
    }
  }
  if (!in.done()) throw DecodeError(in.offset(), "trailing bytes after proof");
  return p;
}

Bytes attestation_message(const PrimaryIdentifier& ai_id, std::uint64_t timestamp) {
  ByteWriter w;
  w.raw(ai_id.digest);
  w.u64(timestamp);
  w.raw(std::string_view("POSSESSION-OK"));
  return std::move(w).take();
}

Attestation attest(const PossessionStatement& st, const PossessionWitness& w, const crypto::SecretKey& attestor_key,
                   std::uint64_t timestamp) {
  if (derive_ai_id(w.h, st.ns) != st.ai_id) {
    throw WitnessMismatch("attestor recomputation does not match the stated AI-ID");
  }
  Attestation a;
  a.ai_id = st.ai_id;
  a.attestor_public_key = crypto::public_key_of(attestor_key);
  a.timestamp = timestamp;
  a.attestor_signature = crypto::sign(attestor_key, attestation_message(st.ai_id, timestamp));
  return a;
}

bool verify_attestation(const Attestation& a) {
  return crypto::verify(a.attestor_public_key, attestation_message(a.ai_id, a.timestamp), a.attestor_signature);
}

}  // namespace aiid::zk
