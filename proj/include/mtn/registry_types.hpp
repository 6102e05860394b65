#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtn/crypto.hpp"
#include "mtn/handle.hpp"
#include "json.hpp"

namespace mtn {

// Registered value types. The set is extensible; these five have fixed
// conventional indices so records stay comparable across deployments.
namespace value_type {
inline constexpr std::string_view kInetHost = "INET_HOST";
inline constexpr std::string_view kPubkey = "PUBKEY";
inline constexpr std::string_view kServiceRef = "SERVICE_REF";
inline constexpr std::string_view kServiceProvider = "SERVICE_PROVIDER";
inline constexpr std::string_view kUrlIface = "URL_IFACE";
}  // namespace value_type

namespace value_index {
inline constexpr std::uint32_t kInetHost = 1;
inline constexpr std::uint32_t kPubkey = 100;
inline constexpr std::uint32_t kServiceRef = 200;
inline constexpr std::uint32_t kServiceProvider = 201;
inline constexpr std::uint32_t kUrlIface = 300;
}  // namespace value_index

struct HandleValue {
  std::uint32_t index = 0;
  std::string type;
  crypto::Bytes data;
  std::uint32_t ttl_s = 0;

  bool operator==(const HandleValue&) const = default;

  std::string data_text() const { return std::string(data.begin(), data.end()); }
  static HandleValue of_text(std::uint32_t index, std::string_view type, std::string_view text,
                             std::uint32_t ttl_s = 0);
};

struct HandleRecord {
  HandleName name;
  std::vector<HandleValue> values;  // kept sorted by index
  std::uint64_t version = 0;

  const HandleValue* find_index(std::uint32_t index) const;
  const HandleValue* find_type(std::string_view type) const;
};

enum class RegistryStatus {
  kOk,
  kHandleNotFound,
  kEmptyResult,
  kAuthFailed,
  kReplayRejected,
  kStaleChallenge,
  kAlreadyExists,
  kInvariantViolation,
  kProtocolError,
  kUnreachable,
  kBindFailure,
};

std::string_view to_string(RegistryStatus s);
RegistryStatus registry_status_from(std::string_view s);

enum class OpKind { kCreate, kUpdate, kDelete };
std::string_view op_name(OpKind op);

struct SignedRequest {
  OpKind op = OpKind::kUpdate;
  HandleName handle;
  std::vector<HandleValue> values;
  std::array<std::uint8_t, 32> nonce{};
  crypto::Bytes signature;
};

struct Challenge {
  std::array<std::uint8_t, 32> nonce{};
  std::int64_t issued_at_ms = 0;
  HandleName target;
};

struct ResolveResult {
  RegistryStatus status = RegistryStatus::kOk;
  std::uint64_t version = 0;
  std::vector<HandleValue> values;
};

struct ApplyResult {
  RegistryStatus status = RegistryStatus::kOk;
  std::uint64_t version = 0;
  std::string message;
};

// Bit-exact string the signature covers: op name, handle text and raw
// nonce separated by NUL, then the values sorted by index, each encoded
// "<decimal index>\x1f<type>\x1f<base64 data>" and joined with \x1e.
std::string signing_string(OpKind op, const HandleName& handle,
                           const std::array<std::uint8_t, 32>& nonce,
                           const std::vector<HandleValue>& values);

nlohmann::json value_to_json(const HandleValue& v);
HandleValue value_from_json(const nlohmann::json& j);  // throws std::invalid_argument
nlohmann::json values_to_json(const std::vector<HandleValue>& vs);
std::vector<HandleValue> values_from_json(const nlohmann::json& j);

}  // namespace mtn
