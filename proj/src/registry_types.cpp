#include "mtn/registry_types.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtn {

HandleValue HandleValue::of_text(std::uint32_t index, std::string_view type,
                                 std::string_view text, std::uint32_t ttl_s) {
  HandleValue v;
  v.index = index;
  v.type = std::string(type);
  v.data.assign(text.begin(), text.end());
  v.ttl_s = ttl_s;
  return v;
}

const HandleValue* HandleRecord::find_index(std::uint32_t index) const {
  for (const auto& v : values) {
    if (v.index == index) return &v;
  }
  return nullptr;
}

const HandleValue* HandleRecord::find_type(std::string_view type) const {
  for (const auto& v : values) {
    if (v.type == type) return &v;
  }
  return nullptr;
}

std::string_view to_string(RegistryStatus s) {
  switch (s) {
    case RegistryStatus::kOk: return "OK";
    case RegistryStatus::kHandleNotFound: return "HANDLE_NOT_FOUND";
    case RegistryStatus::kEmptyResult: return "EMPTY_RESULT";
    case RegistryStatus::kAuthFailed: return "AUTH_FAILED";
    case RegistryStatus::kReplayRejected: return "REPLAY_REJECTED";
    case RegistryStatus::kStaleChallenge: return "STALE_CHALLENGE";
    case RegistryStatus::kAlreadyExists: return "ALREADY_EXISTS";
    case RegistryStatus::kInvariantViolation: return "INVARIANT_VIOLATION";
    case RegistryStatus::kProtocolError: return "PROTOCOL_ERROR";
    case RegistryStatus::kUnreachable: return "UNREACHABLE";
    case RegistryStatus::kBindFailure: return "BIND_FAILURE";
  }
  return "UNKNOWN";
}

RegistryStatus registry_status_from(std::string_view s) {
  if (s == "OK") return RegistryStatus::kOk;
  if (s == "HANDLE_NOT_FOUND") return RegistryStatus::kHandleNotFound;
  if (s == "EMPTY_RESULT") return RegistryStatus::kEmptyResult;
  if (s == "AUTH_FAILED") return RegistryStatus::kAuthFailed;
  if (s == "REPLAY_REJECTED") return RegistryStatus::kReplayRejected;
  if (s == "STALE_CHALLENGE") return RegistryStatus::kStaleChallenge;
  if (s == "ALREADY_EXISTS") return RegistryStatus::kAlreadyExists;
  if (s == "INVARIANT_VIOLATION") return RegistryStatus::kInvariantViolation;
  if (s == "BIND_FAILURE") return RegistryStatus::kBindFailure;
  if (s == "UNREACHABLE") return RegistryStatus::kUnreachable;
  return RegistryStatus::kProtocolError;
}

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kCreate: return "CREATE";
    case OpKind::kUpdate: return "UPDATE";
    case OpKind::kDelete: return "DELETE";
  }
  return "UNKNOWN";
}

std::string signing_string(OpKind op, const HandleName& handle,
                           const std::array<std::uint8_t, 32>& nonce,
                           const std::vector<HandleValue>& values) {
  std::string s;
  s.append(op_name(op));
  s.push_back('\0');
  s.append(handle.text());
  s.push_back('\0');
  s.append(reinterpret_cast<const char*>(nonce.data()), nonce.size());
  s.push_back('\0');

  std::vector<const HandleValue*> sorted;
  sorted.reserve(values.size());
  for (const auto& v : values) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const HandleValue* a, const HandleValue* b) { return a->index < b->index; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) s.push_back('\x1e');
    s.append(std::to_string(sorted[i]->index));
    s.push_back('\x1f');
    s.append(sorted[i]->type);
    s.push_back('\x1f');
    s.append(crypto::b64_encode(sorted[i]->data));
  }
  return s;
}

nlohmann::json value_to_json(const HandleValue& v) {
  return nlohmann::json{{"index", v.index},
                        {"type", v.type},
                        {"data_b64", crypto::b64_encode(v.data)},
                        {"ttl_s", v.ttl_s}};
}

HandleValue value_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("value must be an object");
  HandleValue v;
  if (!j.contains("index") || !j["index"].is_number_unsigned() ||
      j["index"].get<std::uint64_t>() == 0 || j["index"].get<std::uint64_t>() > 0xffffffffull) {
    throw std::invalid_argument("value index must be a positive integer");
  }
  v.index = j["index"].get<std::uint32_t>();
  if (!j.contains("type") || !j["type"].is_string()) {
    throw std::invalid_argument("value type missing");
  }
  v.type = j["type"].get<std::string>();
  if (v.type.empty()) throw std::invalid_argument("value type empty");
  if (!j.contains("data_b64") || !j["data_b64"].is_string()) {
    throw std::invalid_argument("value data missing");
  }
  v.data = crypto::b64_decode(j["data_b64"].get<std::string>());
  if (j.contains("ttl_s")) {
    if (!j["ttl_s"].is_number_unsigned()) throw std::invalid_argument("ttl must be unsigned");
    v.ttl_s = j["ttl_s"].get<std::uint32_t>();
  }
  return v;
}

nlohmann::json values_to_json(const std::vector<HandleValue>& vs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : vs) arr.push_back(value_to_json(v));
  return arr;
}

std::vector<HandleValue> values_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("values must be an array");
  std::vector<HandleValue> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(value_from_json(item));
  return out;
}

}  // namespace mtn
