#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "mtn/clock.hpp"
#include "mtn/registry_types.hpp"

namespace mtn {

// Handle record store with challenge/response authenticated mutations and
// an append-only journal. Mutations serialize under a writer lock and are
// journaled (with fsync) before they are acknowledged; resolution takes a
// reader lock, so reads proceed in parallel. A nonce is consumed by the
// first request that presents it, whatever that request's outcome.
class RegistryStore {
 public:
  // Empty journal_path keeps the store purely in memory. A nonempty path
  // is replayed on construction; a torn final frame is discarded.
  RegistryStore(std::filesystem::path journal_path, std::shared_ptr<Clock> clock,
                std::int64_t challenge_ttl_ms = 30'000);
  ~RegistryStore();

  RegistryStore(const RegistryStore&) = delete;
  RegistryStore& operator=(const RegistryStore&) = delete;

  void set_prefix_admin(const std::string& prefix, const crypto::VerifyKey& key);

  ResolveResult resolve(const HandleName& handle,
                        const std::optional<std::string>& type_filter = {}) const;
  Challenge issue_challenge(const HandleName& handle);
  ApplyResult apply_signed(const SignedRequest& req);

  // Deterministic text form of every record; equal stores serialize
  // identically. Used for crash-recovery comparison and the store hash.
  std::string canonical_serialization() const;
  std::array<std::uint8_t, 32> store_hash() const;
  std::size_t record_count() const;
  std::size_t outstanding_challenges() const;

 private:
  ApplyResult apply_mutation(const SignedRequest& req, bool from_journal,
                             std::uint64_t journal_version);
  void append_journal(OpKind op, const HandleName& handle,
                      const std::vector<HandleValue>& values, std::uint64_t version);
  void replay_journal();
  static std::optional<std::string> check_record_invariants(const HandleRecord& rec);

  std::shared_ptr<Clock> clock_;
  std::int64_t challenge_ttl_ms_;
  std::filesystem::path journal_path_;
  int journal_fd_ = -1;

  mutable std::shared_mutex mu_;
  std::map<HandleName, HandleRecord> records_;
  std::map<std::string, crypto::VerifyKey> prefix_admins_;
  std::unordered_map<std::string, Challenge> outstanding_;  // key: nonce hex
};

}  // namespace mtn
