#include "mtn/registry_store.hpp"

#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "mtn/registry_client.hpp"
#include "mtn/registry_service.hpp"
#include "mtn/wire.hpp"

using namespace mtn;

namespace {

SignedRequest make_signed(RegistryStore& store, OpKind op, const HandleName& handle,
                          std::vector<HandleValue> values, const crypto::SigningKey& key) {
  Challenge ch = store.issue_challenge(handle);
  SignedRequest req;
  req.op = op;
  req.handle = handle;
  req.values = std::move(values);
  req.nonce = ch.nonce;
  req.signature = crypto::sign_detached(key, signing_string(op, handle, ch.nonce, req.values));
  return req;
}

HandleValue pubkey_value(const crypto::VerifyKey& key) {
  HandleValue v;
  v.index = value_index::kPubkey;
  v.type = std::string(value_type::kPubkey);
  v.data.assign(key.bytes.begin(), key.bytes.end());
  return v;
}

HandleValue inet_value(std::string_view addr) {
  return HandleValue::of_text(value_index::kInetHost, value_type::kInetHost, addr);
}

struct Fixture {
  std::shared_ptr<SimulatedClock> clock = std::make_shared<SimulatedClock>();
  crypto::KeyPair admin = crypto::generate_keypair();
  crypto::KeyPair host = crypto::generate_keypair();
  RegistryStore store{"", clock};
  HandleName pda{"hdl", "pda"};

  Fixture() { store.set_prefix_admin("hdl", admin.pub); }

  ApplyResult create_pda() {
    auto req = make_signed(store, OpKind::kCreate, pda, {pubkey_value(host.pub)}, admin.sec);
    return store.apply_signed(req);
  }
};

}  // namespace

TEST_SUITE("registry-store") {

TEST_CASE("resolve unknown handle") {
  Fixture f;
  CHECK(f.store.resolve(HandleName{"unknown", "x"}).status == RegistryStatus::kHandleNotFound);
}

TEST_CASE("create then resolve returns exactly the created values") {
  Fixture f;
  auto created = f.create_pda();
  REQUIRE(created.status == RegistryStatus::kOk);
  CHECK(created.version == 1);

  auto res = f.store.resolve(f.pda);
  REQUIRE(res.status == RegistryStatus::kOk);
  CHECK(res.version == 1);
  REQUIRE(res.values.size() == 1);
  CHECK(res.values[0].type == value_type::kPubkey);

  // Filter that matches nothing on an existing record.
  auto filtered = f.store.resolve(f.pda, std::string(value_type::kInetHost));
  CHECK(filtered.status == RegistryStatus::kEmptyResult);
}

TEST_CASE("update replaces values and bumps the version by one") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);

  auto up = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {inet_value("2001:db8::1")}, f.host.sec));
  REQUIRE(up.status == RegistryStatus::kOk);
  CHECK(up.version == 2);

  auto res = f.store.resolve(f.pda, std::string(value_type::kInetHost));
  REQUIRE(res.status == RegistryStatus::kOk);
  CHECK(res.values[0].data_text() == "2001:db8::1");

  // Replacing the same index keeps one value and bumps the version again.
  auto up2 = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {inet_value("10.0.0.7")}, f.host.sec));
  CHECK(up2.version == 3);
  auto res2 = f.store.resolve(f.pda, std::string(value_type::kInetHost));
  REQUIRE(res2.values.size() == 1);
  CHECK(res2.values[0].data_text() == "10.0.0.7");
}

TEST_CASE("update with an unrelated key fails and leaves the record unchanged") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  auto before = f.store.canonical_serialization();

  crypto::KeyPair stranger = crypto::generate_keypair();
  auto up = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {inet_value("10.0.0.1")}, stranger.sec));
  CHECK(up.status == RegistryStatus::kAuthFailed);
  CHECK(f.store.canonical_serialization() == before);
}

TEST_CASE("prefix admin may update records under its prefix") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  auto up = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {inet_value("10.0.0.9")}, f.admin.sec));
  CHECK(up.status == RegistryStatus::kOk);
}

TEST_CASE("challenges are single use and expire") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);

  Challenge a = f.store.issue_challenge(f.pda);
  Challenge b = f.store.issue_challenge(f.pda);
  CHECK(a.nonce != b.nonce);

  // Replay: reusing an accepted request's nonce must fail.
  SignedRequest req;
  req.op = OpKind::kUpdate;
  req.handle = f.pda;
  req.values = {inet_value("10.0.0.2")};
  req.nonce = a.nonce;
  req.signature = crypto::sign_detached(
      f.host.sec, signing_string(req.op, req.handle, req.nonce, req.values));
  CHECK(f.store.apply_signed(req).status == RegistryStatus::kOk);
  CHECK(f.store.apply_signed(req).status == RegistryStatus::kReplayRejected);

  // Staleness: a challenge older than the ttl is rejected.
  f.clock->advance_ms(31'000);
  SignedRequest stale;
  stale.op = OpKind::kUpdate;
  stale.handle = f.pda;
  stale.values = {inet_value("10.0.0.3")};
  stale.nonce = b.nonce;
  stale.signature = crypto::sign_detached(
      f.host.sec, signing_string(stale.op, stale.handle, stale.nonce, stale.values));
  CHECK(f.store.apply_signed(stale).status == RegistryStatus::kStaleChallenge);
}

TEST_CASE("nonce issued for one handle cannot authorize another") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  HandleName other{"hdl", "laptop1"};
  auto req = make_signed(f.store, OpKind::kCreate, other, {pubkey_value(f.host.pub)}, f.admin.sec);
  req.handle = f.pda;  // mismatch: challenge was for hdl/laptop1
  req.signature = crypto::sign_detached(
      f.admin.sec, signing_string(req.op, req.handle, req.nonce, req.values));
  CHECK(f.store.apply_signed(req).status == RegistryStatus::kReplayRejected);
}

TEST_CASE("record invariants are enforced") {
  Fixture f;
  // CREATE without a PUBKEY value.
  auto no_key = make_signed(f.store, OpKind::kCreate, f.pda, {inet_value("10.0.0.1")}, f.admin.sec);
  CHECK(f.store.apply_signed(no_key).status == RegistryStatus::kInvariantViolation);

  REQUIRE(f.create_pda().status == RegistryStatus::kOk);

  // Two INET_HOST values at different indices.
  HandleValue second = inet_value("10.0.0.2");
  second.index = 2;
  auto two_inet = f.store.apply_signed(make_signed(
      f.store, OpKind::kUpdate, f.pda, {inet_value("10.0.0.1"), second}, f.host.sec));
  CHECK(two_inet.status == RegistryStatus::kInvariantViolation);

  // Clearing the PUBKEY would leave the record unadministrable.
  HandleValue clear_key;
  clear_key.index = value_index::kPubkey;
  clear_key.type = std::string(value_type::kPubkey);
  auto cleared = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {clear_key}, f.host.sec));
  CHECK(cleared.status == RegistryStatus::kInvariantViolation);

  // CREATE of an existing handle.
  auto dup = make_signed(f.store, OpKind::kCreate, f.pda, {pubkey_value(f.host.pub)}, f.admin.sec);
  CHECK(f.store.apply_signed(dup).status == RegistryStatus::kAlreadyExists);
}

TEST_CASE("empty data clears a value") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  REQUIRE(f.store
              .apply_signed(make_signed(f.store, OpKind::kUpdate, f.pda,
                                        {inet_value("2001:db8::1")}, f.host.sec))
              .status == RegistryStatus::kOk);

  HandleValue clear;
  clear.index = value_index::kInetHost;
  clear.type = std::string(value_type::kInetHost);
  auto res = f.store.apply_signed(
      make_signed(f.store, OpKind::kUpdate, f.pda, {clear}, f.host.sec));
  REQUIRE(res.status == RegistryStatus::kOk);
  CHECK(f.store.resolve(f.pda, std::string(value_type::kInetHost)).status ==
        RegistryStatus::kEmptyResult);
}

TEST_CASE("empty update is an authenticated no-op") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  auto noop = f.store.apply_signed(make_signed(f.store, OpKind::kUpdate, f.pda, {}, f.host.sec));
  CHECK(noop.status == RegistryStatus::kOk);
  CHECK(noop.version == 1);  // unchanged
  crypto::KeyPair stranger = crypto::generate_keypair();
  auto bad = f.store.apply_signed(make_signed(f.store, OpKind::kUpdate, f.pda, {}, stranger.sec));
  CHECK(bad.status == RegistryStatus::kAuthFailed);
}

TEST_CASE("delete removes the record") {
  Fixture f;
  REQUIRE(f.create_pda().status == RegistryStatus::kOk);
  auto del = f.store.apply_signed(make_signed(f.store, OpKind::kDelete, f.pda, {}, f.host.sec));
  CHECK(del.status == RegistryStatus::kOk);
  CHECK(f.store.resolve(f.pda).status == RegistryStatus::kHandleNotFound);
  auto del2 = f.store.apply_signed(make_signed(f.store, OpKind::kDelete, f.pda, {}, f.host.sec));
  CHECK(del2.status == RegistryStatus::kHandleNotFound);
}

TEST_CASE("journal replay reconstructs the store") {
  auto clock = std::make_shared<SimulatedClock>();
  auto path = std::filesystem::temp_directory_path() / "mtn_registry_test_journal.bin";
  std::filesystem::remove(path);

  crypto::KeyPair admin = crypto::generate_keypair();
  crypto::KeyPair host = crypto::generate_keypair();
  HandleName pda{"hdl", "pda"};
  std::string before;
  {
    RegistryStore store(path, clock);
    store.set_prefix_admin("hdl", admin.pub);
    REQUIRE(store
                .apply_signed(make_signed(store, OpKind::kCreate, pda,
                                          {pubkey_value(host.pub)}, admin.sec))
                .status == RegistryStatus::kOk);
    for (int i = 0; i < 5; ++i) {
      REQUIRE(store
                  .apply_signed(make_signed(store, OpKind::kUpdate, pda,
                                            {inet_value("10.0.0." + std::to_string(i))},
                                            host.sec))
                  .status == RegistryStatus::kOk);
    }
    before = store.canonical_serialization();
    // No graceful shutdown: the store object goes away as a crash would.
  }
  RegistryStore replayed(path, clock);
  CHECK(replayed.canonical_serialization() == before);
  std::filesystem::remove(path);
}

}  // TEST_SUITE

TEST_SUITE("registry-service") {

TEST_CASE("resolve and mutate over the wire") {
  auto clock = std::make_shared<SimulatedClock>();
  RegistryStore store("", clock);
  crypto::KeyPair admin = crypto::generate_keypair();
  crypto::KeyPair host = crypto::generate_keypair();
  store.set_prefix_admin("hdl", admin.pub);

  RegistryService service(store, net::Endpoint{"127.0.0.1", 0});
  REQUIRE(service.start());
  RegistryClient client(service.endpoint());
  HandleName pda{"hdl", "pda"};

  CHECK(client.ping());
  CHECK(client.resolve(pda).status == RegistryStatus::kHandleNotFound);

  auto created = client.apply(OpKind::kCreate, pda, {pubkey_value(host.pub)}, admin.sec);
  REQUIRE(created.status == RegistryStatus::kOk);

  auto up = client.apply(OpKind::kUpdate, pda, {inet_value("2001:db8::7")}, host.sec);
  REQUIRE(up.status == RegistryStatus::kOk);
  CHECK(up.version == 2);

  auto res = client.resolve(pda, std::string(value_type::kInetHost));
  REQUIRE(res.status == RegistryStatus::kOk);
  CHECK(res.first_text(value_type::kInetHost) == "2001:db8::7");

  service.stop();
  CHECK(client.resolve(pda).status == RegistryStatus::kUnreachable);
}

TEST_CASE("concurrent updates to two handles both commit") {
  auto clock = std::make_shared<SimulatedClock>();
  RegistryStore store("", clock);
  crypto::KeyPair admin = crypto::generate_keypair();
  crypto::KeyPair key_a = crypto::generate_keypair();
  crypto::KeyPair key_b = crypto::generate_keypair();
  store.set_prefix_admin("hdl", admin.pub);

  RegistryService service(store, net::Endpoint{"127.0.0.1", 0});
  REQUIRE(service.start());
  HandleName a{"hdl", "laptop1"};
  HandleName b{"hdl", "desktop1"};
  {
    RegistryClient client(service.endpoint());
    REQUIRE(client.apply(OpKind::kCreate, a, {pubkey_value(key_a.pub)}, admin.sec).status ==
            RegistryStatus::kOk);
    REQUIRE(client.apply(OpKind::kCreate, b, {pubkey_value(key_b.pub)}, admin.sec).status ==
            RegistryStatus::kOk);
  }

  auto worker = [&](const HandleName& h, const crypto::SigningKey& key, int base) {
    RegistryClient client(service.endpoint());
    for (int i = 0; i < 10; ++i) {
      auto res = client.apply(OpKind::kUpdate, h,
                              {inet_value("10.0." + std::to_string(base) + "." + std::to_string(i))},
                              key);
      REQUIRE(res.status == RegistryStatus::kOk);
    }
  };
  std::thread ta(worker, a, key_a.sec, 1);
  std::thread tb(worker, b, key_b.sec, 2);
  ta.join();
  tb.join();

  RegistryClient client(service.endpoint());
  CHECK(client.resolve(a).version == 11);
  CHECK(client.resolve(b).version == 11);
  service.stop();
}

TEST_CASE("garbled frames get a protocol error") {
  auto clock = std::make_shared<SimulatedClock>();
  RegistryStore store("", clock);
  RegistryService service(store, net::Endpoint{"127.0.0.1", 0});
  REQUIRE(service.start());

  auto stream = net::TcpStream::connect(service.endpoint());
  REQUIRE(stream.has_value());
  // A frame whose body is not JSON.
  std::uint8_t bad[] = {0, 0, 0, 3, 'x', 'y', 'z'};
  REQUIRE(stream->send_all(bad, sizeof bad));
  auto reply = wire::read_frame(*stream);
  REQUIRE(reply.kind == wire::ReadResult::Kind::kOk);
  CHECK(reply.body["status"] == "PROTOCOL_ERROR");
  service.stop();
}

TEST_CASE("unsigned mutations never change the store") {
  auto clock = std::make_shared<SimulatedClock>();
  RegistryStore store("", clock);
  crypto::KeyPair admin = crypto::generate_keypair();
  store.set_prefix_admin("hdl", admin.pub);
  RegistryService service(store, net::Endpoint{"127.0.0.1", 0});
  REQUIRE(service.start());
  RegistryClient client(service.endpoint());

  auto hash_before = store.store_hash();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    nlohmann::json req{{"op", i % 2 ? "CREATE" : "UPDATE"},
                       {"handle", "hdl/x" + std::to_string(i)},
                       {"values", nlohmann::json::array()},
                       {"nonce_b64", crypto::b64_encode(crypto::random_bytes(32))},
                       {"sig_b64", crypto::b64_encode(crypto::random_bytes(64))}};
    auto reply = client.call_raw(req);
    CHECK(reply["status"] != "OK");
  }
  CHECK(store.store_hash() == hash_before);
  service.stop();
}

}  // TEST_SUITE
