#include "mtn/registry_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "mtn/wire.hpp"

namespace mtn {

namespace {

std::string nonce_key(const std::array<std::uint8_t, 32>& nonce) {
  return crypto::hex(nonce.data(), nonce.size());
}

bool unique_indices(const std::vector<HandleValue>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values[i].index == values[j].index) return false;
    }
  }
  return true;
}

void sort_by_index(std::vector<HandleValue>& values) {
  std::sort(values.begin(), values.end(),
            [](const HandleValue& a, const HandleValue& b) { return a.index < b.index; });
}

}  // namespace

RegistryStore::RegistryStore(std::filesystem::path journal_path, std::shared_ptr<Clock> clock,
                             std::int64_t challenge_ttl_ms)
    : clock_(std::move(clock)),
      challenge_ttl_ms_(challenge_ttl_ms),
      journal_path_(std::move(journal_path)) {
  if (!journal_path_.empty()) {
    replay_journal();
    journal_fd_ = ::open(journal_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0600);
    if (journal_fd_ < 0) throw std::runtime_error("cannot open journal: " + journal_path_.string());
  }
}

RegistryStore::~RegistryStore() {
  if (journal_fd_ >= 0) ::close(journal_fd_);
}

void RegistryStore::replay_journal() {
  auto frames = wire::read_frame_file(journal_path_);
  for (const auto& frame : frames) {
    SignedRequest req;
    std::uint64_t version = 0;
    try {
      std::string op = frame.at("op").get<std::string>();
      if (op == "CREATE") req.op = OpKind::kCreate;
      else if (op == "UPDATE") req.op = OpKind::kUpdate;
      else if (op == "DELETE") req.op = OpKind::kDelete;
      else throw std::runtime_error("unknown journal op " + op);
      req.handle = parse_handle(frame.at("handle").get<std::string>());
      req.values = values_from_json(frame.at("values"));
      version = frame.at("version").get<std::uint64_t>();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("corrupt journal: ") + e.what());
    }
    auto result = apply_mutation(req, /*from_journal=*/true, version);
    if (result.status != RegistryStatus::kOk) {
      throw std::runtime_error("journal replay failed: " + result.message);
    }
  }
}

void RegistryStore::set_prefix_admin(const std::string& prefix, const crypto::VerifyKey& key) {
  std::unique_lock lock(mu_);
  prefix_admins_[prefix] = key;
}

ResolveResult RegistryStore::resolve(const HandleName& handle,
                                     const std::optional<std::string>& type_filter) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(handle);
  if (it == records_.end()) return {RegistryStatus::kHandleNotFound, 0, {}};
  ResolveResult out;
  out.version = it->second.version;
  for (const auto& v : it->second.values) {
    if (!type_filter || v.type == *type_filter) out.values.push_back(v);
  }
  out.status = out.values.empty() ? RegistryStatus::kEmptyResult : RegistryStatus::kOk;
  return out;
}

Challenge RegistryStore::issue_challenge(const HandleName& handle) {
  Challenge ch;
  auto nonce = crypto::random_bytes(ch.nonce.size());
  std::copy(nonce.begin(), nonce.end(), ch.nonce.begin());
  ch.issued_at_ms = clock_->now_ms();
  ch.target = handle;

  std::unique_lock lock(mu_);
  // Drop expired challenges so the table stays bounded.
  std::erase_if(outstanding_, [&](const auto& kv) {
    return kv.second.issued_at_ms + challenge_ttl_ms_ < ch.issued_at_ms;
  });
  outstanding_[nonce_key(ch.nonce)] = ch;
  return ch;
}

ApplyResult RegistryStore::apply_signed(const SignedRequest& req) {
  std::unique_lock lock(mu_);

  auto it = outstanding_.find(nonce_key(req.nonce));
  if (it == outstanding_.end()) {
    return {RegistryStatus::kReplayRejected, 0, "nonce unknown or already used"};
  }
  Challenge ch = it->second;
  outstanding_.erase(it);  // single use, consumed by this attempt

  if (ch.issued_at_ms + challenge_ttl_ms_ < clock_->now_ms()) {
    return {RegistryStatus::kStaleChallenge, 0, "challenge expired"};
  }
  if (ch.target != req.handle) {
    return {RegistryStatus::kReplayRejected, 0, "nonce was issued for a different handle"};
  }

  // Collect the keys that may authorize this operation.
  std::vector<crypto::VerifyKey> keys;
  auto admin = prefix_admins_.find(req.handle.prefix);
  if (req.op == OpKind::kUpdate || req.op == OpKind::kDelete) {
    auto rec = records_.find(req.handle);
    if (rec == records_.end()) {
      return {RegistryStatus::kHandleNotFound, 0, "no such handle"};
    }
    if (const HandleValue* pk = rec->second.find_type(value_type::kPubkey);
        pk && pk->data.size() == 32) {
      crypto::VerifyKey vk;
      std::copy(pk->data.begin(), pk->data.end(), vk.bytes.begin());
      keys.push_back(vk);
    }
  }
  if (admin != prefix_admins_.end()) keys.push_back(admin->second);

  std::string msg = signing_string(req.op, req.handle, req.nonce, req.values);
  bool authorized = false;
  for (const auto& key : keys) {
    if (crypto::verify_detached(key, msg, req.signature)) {
      authorized = true;
      break;
    }
  }
  if (!authorized) {
    return {RegistryStatus::kAuthFailed, 0, "signature does not verify"};
  }

  return apply_mutation(req, /*from_journal=*/false, 0);
}

ApplyResult RegistryStore::apply_mutation(const SignedRequest& req, bool from_journal,
                                          std::uint64_t journal_version) {
  switch (req.op) {
    case OpKind::kCreate: {
      if (records_.count(req.handle)) {
        return {RegistryStatus::kAlreadyExists, 0, "handle already exists"};
      }
      HandleRecord rec;
      rec.name = req.handle;
      rec.values = req.values;
      for (const auto& v : rec.values) {
        if (v.data.empty()) {
          return {RegistryStatus::kInvariantViolation, 0, "empty value data in CREATE"};
        }
      }
      sort_by_index(rec.values);
      rec.version = from_journal ? journal_version : 1;
      if (auto err = check_record_invariants(rec)) {
        return {RegistryStatus::kInvariantViolation, 0, *err};
      }
      if (!from_journal) {
        append_journal(req.op, req.handle, req.values, rec.version);
      }
      records_[req.handle] = std::move(rec);
      return {RegistryStatus::kOk, records_[req.handle].version, ""};
    }
    case OpKind::kUpdate: {
      auto it = records_.find(req.handle);
      if (it == records_.end()) {
        return {RegistryStatus::kHandleNotFound, 0, "no such handle"};
      }
      if (req.values.empty()) {
        // Authenticated no-op: verifies credentials without mutating.
        return {RegistryStatus::kOk, it->second.version, "no-op"};
      }
      if (!unique_indices(req.values)) {
        return {RegistryStatus::kInvariantViolation, 0, "duplicate indices in request"};
      }
      HandleRecord next = it->second;
      for (const auto& v : req.values) {
        auto pos = std::find_if(next.values.begin(), next.values.end(),
                                [&](const HandleValue& e) { return e.index == v.index; });
        if (v.data.empty()) {
          // Empty data clears the value at that index.
          if (pos != next.values.end()) next.values.erase(pos);
        } else if (pos != next.values.end()) {
          *pos = v;
        } else {
          next.values.push_back(v);
        }
      }
      sort_by_index(next.values);
      next.version = from_journal ? journal_version : it->second.version + 1;
      if (auto err = check_record_invariants(next)) {
        return {RegistryStatus::kInvariantViolation, 0, *err};
      }
      if (!from_journal) {
        append_journal(req.op, req.handle, req.values, next.version);
      }
      it->second = std::move(next);
      return {RegistryStatus::kOk, it->second.version, ""};
    }
    case OpKind::kDelete: {
      auto it = records_.find(req.handle);
      if (it == records_.end()) {
        return {RegistryStatus::kHandleNotFound, 0, "no such handle"};
      }
      std::uint64_t version = it->second.version;
      if (!from_journal) {
        append_journal(req.op, req.handle, {}, version);
      }
      records_.erase(it);
      return {RegistryStatus::kOk, version, ""};
    }
  }
  return {RegistryStatus::kProtocolError, 0, "unknown op"};
}

std::optional<std::string> RegistryStore::check_record_invariants(const HandleRecord& rec) {
  if (!unique_indices(rec.values)) return "duplicate value index";
  int inet = 0, pubkey = 0;
  for (const auto& v : rec.values) {
    if (v.index == 0) return "value index must be positive";
    if (v.type.empty()) return "value type empty";
    if (v.type == value_type::kInetHost) ++inet;
    if (v.type == value_type::kPubkey) {
      ++pubkey;
      if (v.data.size() != 32) return "PUBKEY must be a 32-byte verify key";
    }
  }
  if (inet > 1) return "more than one INET_HOST value";
  if (pubkey != 1) return "record must carry exactly one PUBKEY value";
  return std::nullopt;
}

void RegistryStore::append_journal(OpKind op, const HandleName& handle,
                                   const std::vector<HandleValue>& values,
                                   std::uint64_t version) {
  if (journal_fd_ < 0) return;
  nlohmann::json frame{{"op", std::string(op_name(op))},
                       {"handle", handle.text()},
                       {"values", values_to_json(values)},
                       {"version", version}};
  wire::append_frame_file(journal_fd_, frame);
  if (::fdatasync(journal_fd_) != 0) {
    throw std::runtime_error("journal fsync failed");
  }
}

std::string RegistryStore::canonical_serialization() const {
  std::shared_lock lock(mu_);
  std::string out;
  for (const auto& [name, rec] : records_) {
    out.append("record ");
    out.append(name.text());
    out.append(" v=");
    out.append(std::to_string(rec.version));
    out.push_back('\n');
    for (const auto& v : rec.values) {
      out.append("value ");
      out.append(std::to_string(v.index));
      out.push_back(' ');
      out.append(v.type);
      out.push_back(' ');
      out.append(crypto::b64_encode(v.data));
      out.append(" ttl=");
      out.append(std::to_string(v.ttl_s));
      out.push_back('\n');
    }
  }
  return out;
}

std::array<std::uint8_t, 32> RegistryStore::store_hash() const {
  return crypto::digest256(canonical_serialization());
}

std::size_t RegistryStore::record_count() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

std::size_t RegistryStore::outstanding_challenges() const {
  std::shared_lock lock(mu_);
  return outstanding_.size();
}

}  // namespace mtn
