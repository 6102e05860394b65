#pragma once

#include <optional>

#include "mtn/net.hpp"
#include "mtn/registry_types.hpp"

namespace mtn {

// Client side of the registry wire protocol. Every call opens a fresh
// connection; handles that identify mobile hosts must never be served
// from a cache, and at this scale connection reuse buys nothing.
class RegistryClient {
 public:
  explicit RegistryClient(net::Endpoint endpoint, int timeout_ms = 2000)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

  struct ResolveReply {
    RegistryStatus status = RegistryStatus::kUnreachable;
    std::uint64_t version = 0;
    std::vector<HandleValue> values;
    // First value of the requested type as text, when present.
    std::optional<std::string> first_text(std::string_view type) const;
  };
  ResolveReply resolve(const HandleName& handle, std::optional<std::string> type = {});

  struct ChallengeReply {
    RegistryStatus status = RegistryStatus::kUnreachable;
    std::array<std::uint8_t, 32> nonce{};
  };
  ChallengeReply challenge(const HandleName& handle);

  // Challenge round trip plus the signed operation.
  ApplyResult apply(OpKind op, const HandleName& handle, const std::vector<HandleValue>& values,
                    const crypto::SigningKey& key);

  // Preassembled request, no signing; used by fuzzing and fault tests.
  nlohmann::json call_raw(const nlohmann::json& request);

  bool ping();

  const net::Endpoint& endpoint() const { return endpoint_; }

 private:
  net::Endpoint endpoint_;
  int timeout_ms_;
};

}  // namespace mtn
