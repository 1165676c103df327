#pragma once

#include <array>
#include <cstdint>

// SHA-256 compression of one padded block, written once against an abstract
// gate engine. The same gate sequence drives plain evaluation, the 3-party
// prover simulation and the 2-view verifier replay, so all three agree on
// gate order by construction.
//
// Engine requirements:
//   using Word;
//   Word constant(uint32_t);
//   Word xor_(Word, Word);
//   Word and_(Word, Word);        // nonlinear, one view word
//   Word add(Word, Word);         // mod 2^32 ripple-carry, one view word
//   Word rotr(Word, int);
//   Word shr(Word, int);
namespace aiid::zk {

inline constexpr std::array<std::uint32_t, 64> kRoundConstants = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
};

inline constexpr std::array<std::uint32_t, 8> kInitialState = {
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
};

// Nonlinear word gates per block: 64 Ch + 64 Maj ANDs, 600 additions.
inline constexpr std::size_t kNonlinearWords = 728;

template <class Engine>
std::array<typename Engine::Word, 8> compress_block(Engine& g,
                                                    const std::array<typename Engine::Word, 16>& block) {
  using Word = typename Engine::Word;
  std::array<Word, 64> w;
  for (int i = 0; i < 16; ++i) w[i] = block[i];
  for (int i = 16; i < 64; ++i) {
    Word s0 = g.xor_(g.xor_(g.rotr(w[i - 15], 7), g.rotr(w[i - 15], 18)), g.shr(w[i - 15], 3));
    Word s1 = g.xor_(g.xor_(g.rotr(w[i - 2], 17), g.rotr(w[i - 2], 19)), g.shr(w[i - 2], 10));
    w[i] = g.add(g.add(g.add(w[i - 16], s0), w[i - 7]), s1);
  }

  std::array<Word, 8> iv;
  for (int i = 0; i < 8; ++i) iv[i] = g.constant(kInitialState[i]);
  Word a = iv[0], b = iv[1], c = iv[2], d = iv[3], e = iv[4], f = iv[5], gg = iv[6], h = iv[7];

  for (int i = 0; i < 64; ++i) {
    Word S1 = g.xor_(g.xor_(g.rotr(e, 6), g.rotr(e, 11)), g.rotr(e, 25));
    // ch = g ^ (e & (f ^ g))
    Word ch = g.xor_(gg, g.and_(e, g.xor_(f, gg)));
    Word t1 = g.add(g.add(g.add(g.add(h, S1), ch), g.constant(kRoundConstants[i])), w[i]);
    Word S0 = g.xor_(g.xor_(g.rotr(a, 2), g.rotr(a, 13)), g.rotr(a, 22));
    // maj = a ^ ((a ^ b) & (a ^ c))
    Word maj = g.xor_(a, g.and_(g.xor_(a, b), g.xor_(a, c)));
    Word t2 = g.add(S0, maj);
    h = gg;
    gg = f;
    f = e;
    e = g.add(d, t1);
    d = c;
    c = b;
    b = a;
    a = g.add(t1, t2);
  }

  std::array<Word, 8> out{a, b, c, d, e, f, gg, h};
  for (int i = 0; i < 8; ++i) out[i] = g.add(iv[i], out[i]);
  return out;
}

// Cleartext engine.
struct PlainEngine {
  using Word = std::uint32_t;
  Word constant(std::uint32_t v) const { return v; }
  Word xor_(Word a, Word b) const { return a ^ b; }
  Word and_(Word a, Word b) const { return a & b; }
  Word add(Word a, Word b) const { return a + b; }
  Word rotr(Word a, int n) const { return a >> n | a << (32 - n); }
  Word shr(Word a, int n) const { return a >> n; }
};

}  // namespace aiid::zk
