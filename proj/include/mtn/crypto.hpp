#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtn::crypto {

using Bytes = std::vector<std::uint8_t>;

// Idempotent library init; called lazily by everything below.
void init();

std::string b64_encode(const void* data, std::size_t len);
std::string b64_encode(const Bytes& b);
std::string b64_encode(std::string_view s);
Bytes b64_decode(std::string_view text);  // throws std::invalid_argument

std::array<std::uint8_t, 32> digest256(const void* data, std::size_t len);
std::array<std::uint8_t, 32> digest256(const Bytes& b);
std::array<std::uint8_t, 32> digest256(std::string_view s);

std::string hex(const void* data, std::size_t len);
std::string hex(const Bytes& b);

Bytes random_bytes(std::size_t n);

// Ed25519 keys.
struct SigningKey {
  std::array<std::uint8_t, 64> bytes{};
};
struct VerifyKey {
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const VerifyKey&) const = default;
};
struct KeyPair {
  VerifyKey pub;
  SigningKey sec;
};

KeyPair generate_keypair();
VerifyKey derive_verify_key(const SigningKey& sec);
Bytes sign_detached(const SigningKey& key, std::string_view msg);
bool verify_detached(const VerifyKey& key, std::string_view msg, const Bytes& sig);

// Passphrase sealing for credential caches: argon2id key derivation plus
// an authenticated secretbox. Output layout:
//   [version byte 0x01][16-byte salt][24-byte nonce][ciphertext+tag]
Bytes seal(std::string_view passphrase, const Bytes& plain);
// Empty optional on wrong passphrase, truncation or tampering.
std::optional<Bytes> unseal(std::string_view passphrase, const Bytes& sealed);

}  // namespace mtn::crypto
