#include "mtn/registry_client.hpp"

#include "mtn/wire.hpp"

namespace mtn {

std::optional<std::string> RegistryClient::ResolveReply::first_text(std::string_view type) const {
  for (const auto& v : values) {
    if (v.type == type) return v.data_text();
  }
  return std::nullopt;
}

RegistryClient::ResolveReply RegistryClient::resolve(const HandleName& handle,
                                                     std::optional<std::string> type) {
  nlohmann::json req{{"op", "RESOLVE"}, {"handle", handle.text()}};
  if (type) req["type"] = *type;
  auto reply = wire::call(endpoint_, req, timeout_ms_);
  if (!reply) return {};
  ResolveReply out;
  out.status = registry_status_from(reply->value("status", ""));
  out.version = reply->value("version", std::uint64_t{0});
  try {
    if (reply->contains("values")) out.values = values_from_json((*reply)["values"]);
  } catch (const std::exception&) {
    out.status = RegistryStatus::kProtocolError;
  }
  return out;
}

RegistryClient::ChallengeReply RegistryClient::challenge(const HandleName& handle) {
  nlohmann::json req{{"op", "CHALLENGE"}, {"handle", handle.text()}};
  auto reply = wire::call(endpoint_, req, timeout_ms_);
  if (!reply) return {};
  ChallengeReply out;
  out.status = registry_status_from(reply->value("status", ""));
  if (out.status == RegistryStatus::kOk) {
    try {
      auto nonce = crypto::b64_decode(reply->at("nonce_b64").get<std::string>());
      if (nonce.size() != out.nonce.size()) throw std::invalid_argument("bad nonce size");
      std::copy(nonce.begin(), nonce.end(), out.nonce.begin());
    } catch (const std::exception&) {
      out.status = RegistryStatus::kProtocolError;
    }
  }
  return out;
}

ApplyResult RegistryClient::apply(OpKind op, const HandleName& handle,
                                  const std::vector<HandleValue>& values,
                                  const crypto::SigningKey& key) {
  ChallengeReply ch = challenge(handle);
  if (ch.status != RegistryStatus::kOk) {
    return {ch.status == RegistryStatus::kUnreachable ? RegistryStatus::kUnreachable
                                                      : ch.status,
            0, "challenge failed"};
  }
  std::string msg = signing_string(op, handle, ch.nonce, values);
  crypto::Bytes sig = crypto::sign_detached(key, msg);

  nlohmann::json req{{"op", std::string(op_name(op))},
                     {"handle", handle.text()},
                     {"values", values_to_json(values)},
                     {"nonce_b64", crypto::b64_encode(ch.nonce.data(), ch.nonce.size())},
                     {"sig_b64", crypto::b64_encode(sig)}};
  auto reply = wire::call(endpoint_, req, timeout_ms_);
  if (!reply) return {RegistryStatus::kUnreachable, 0, "no reply"};
  ApplyResult out;
  out.status = registry_status_from(reply->value("status", ""));
  out.version = reply->value("version", std::uint64_t{0});
  out.message = reply->value("error", "");
  return out;
}

nlohmann::json RegistryClient::call_raw(const nlohmann::json& request) {
  auto reply = wire::call(endpoint_, request, timeout_ms_);
  if (!reply) return nlohmann::json{{"status", "UNREACHABLE"}};
  return *reply;
}

bool RegistryClient::ping() {
  auto reply = wire::call(endpoint_, nlohmann::json{{"op", "PING"}}, timeout_ms_);
  return reply && reply->value("status", "") == "OK";
}

}  // namespace mtn
