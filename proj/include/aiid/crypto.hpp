#pragma once

#include <array>
#include <span>

#include "aiid/bytes.hpp"

// Thin wrappers over libsodium: SHA-256, Ed25519 and the system CSPRNG.
namespace aiid::crypto {

using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 64>;  // libsodium layout: seed || public key
using Signature = std::array<std::uint8_t, 64>;

Digest sha256(ByteView data);

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  Sha256& update(ByteView data);
  Sha256& update(std::string_view s) { return update(as_bytes(s)); }
  Digest finish();

 private:
  alignas(64) unsigned char state_[128];
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

KeyPair generate_keypair();
// Recomputes the public half from a secret key.
PublicKey public_key_of(const SecretKey& sk);
Signature sign(const SecretKey& sk, ByteView message);
bool verify(const PublicKey& pk, ByteView message, const Signature& sig);

void random_bytes(std::span<std::uint8_t> out);

}  // namespace aiid::crypto
