#include "mtn/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace mtn::crypto {

namespace {
constexpr std::uint8_t kSealVersion = 0x01;
constexpr std::size_t kSaltLen = 16;  // crypto_pwhash_SALTBYTES

std::array<std::uint8_t, 32> derive_seal_key(std::string_view passphrase,
                                             const std::uint8_t* salt) {
  std::array<std::uint8_t, 32> key{};
  if (crypto_pwhash(key.data(), key.size(), passphrase.data(), passphrase.size(), salt,
                    crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE,
                    crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw std::runtime_error("key derivation failed (out of memory?)");
  }
  return key;
}
}  // namespace

void init() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  });
}

std::string b64_encode(const void* data, std::size_t len) {
  init();
  std::string out(sodium_base64_encoded_len(len, sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), static_cast<const unsigned char*>(data), len,
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::string b64_encode(const Bytes& b) { return b64_encode(b.data(), b.size()); }
std::string b64_encode(std::string_view s) { return b64_encode(s.data(), s.size()); }

Bytes b64_decode(std::string_view text) {
  init();
  Bytes out(text.size() == 0 ? 0 : text.size(), 0);
  std::size_t out_len = 0;
  if (text.empty()) return {};
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &out_len,
                        nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw std::invalid_argument("bad base64");
  }
  out.resize(out_len);
  return out;
}

std::array<std::uint8_t, 32> digest256(const void* data, std::size_t len) {
  init();
  std::array<std::uint8_t, 32> out{};
  crypto_generichash(out.data(), out.size(), static_cast<const unsigned char*>(data), len,
                     nullptr, 0);
  return out;
}

std::array<std::uint8_t, 32> digest256(const Bytes& b) { return digest256(b.data(), b.size()); }
std::array<std::uint8_t, 32> digest256(std::string_view s) { return digest256(s.data(), s.size()); }

std::string hex(const void* data, std::size_t len) {
  static const char* digits = "0123456789abcdef";
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(digits[p[i] >> 4]);
    out.push_back(digits[p[i] & 0xf]);
  }
  return out;
}

std::string hex(const Bytes& b) { return hex(b.data(), b.size()); }

Bytes random_bytes(std::size_t n) {
  init();
  Bytes out(n);
  if (n) randombytes_buf(out.data(), n);
  return out;
}

KeyPair generate_keypair() {
  init();
  KeyPair kp;
  crypto_sign_keypair(kp.pub.bytes.data(), kp.sec.bytes.data());
  return kp;
}

VerifyKey derive_verify_key(const SigningKey& sec) {
  init();
  VerifyKey pub;
  crypto_sign_ed25519_sk_to_pk(pub.bytes.data(), sec.bytes.data());
  return pub;
}

Bytes sign_detached(const SigningKey& key, std::string_view msg) {
  init();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr,
                       reinterpret_cast<const unsigned char*>(msg.data()), msg.size(),
                       key.bytes.data());
  return sig;
}

bool verify_detached(const VerifyKey& key, std::string_view msg, const Bytes& sig) {
  init();
  if (sig.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(sig.data(),
                                     reinterpret_cast<const unsigned char*>(msg.data()),
                                     msg.size(), key.bytes.data()) == 0;
}

Bytes seal(std::string_view passphrase, const Bytes& plain) {
  init();
  Bytes out;
  out.reserve(1 + kSaltLen + crypto_secretbox_NONCEBYTES + plain.size() + crypto_secretbox_MACBYTES);
  out.push_back(kSealVersion);

  std::uint8_t salt[kSaltLen];
  randombytes_buf(salt, sizeof salt);
  out.insert(out.end(), salt, salt + sizeof salt);

  std::uint8_t nonce[crypto_secretbox_NONCEBYTES];
  randombytes_buf(nonce, sizeof nonce);
  out.insert(out.end(), nonce, nonce + sizeof nonce);

  auto key = derive_seal_key(passphrase, salt);
  Bytes boxed(plain.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(boxed.data(), plain.data(), plain.size(), nonce, key.data());
  sodium_memzero(key.data(), key.size());
  out.insert(out.end(), boxed.begin(), boxed.end());
  return out;
}

std::optional<Bytes> unseal(std::string_view passphrase, const Bytes& sealed) {
  init();
  constexpr std::size_t header = 1 + kSaltLen + crypto_secretbox_NONCEBYTES;
  if (sealed.size() < header + crypto_secretbox_MACBYTES) return std::nullopt;
  if (sealed[0] != kSealVersion) return std::nullopt;

  const std::uint8_t* salt = sealed.data() + 1;
  const std::uint8_t* nonce = salt + kSaltLen;
  const std::uint8_t* box = nonce + crypto_secretbox_NONCEBYTES;
  const std::size_t box_len = sealed.size() - header;

  auto key = derive_seal_key(passphrase, salt);
  Bytes plain(box_len - crypto_secretbox_MACBYTES);
  int rc = crypto_secretbox_open_easy(plain.data(), box, box_len, nonce, key.data());
  sodium_memzero(key.data(), key.size());
  if (rc != 0) return std::nullopt;
  return plain;
}

}  // namespace mtn::crypto
