#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "mtn/net.hpp"
#include "mtn/registry_store.hpp"

namespace mtn {

// Serves the registry wire protocol over TCP: length-prefixed JSON frames,
// one reply per request, many concurrent sessions. A malformed frame gets
// a PROTOCOL_ERROR reply and the session is closed.
class RegistryService {
 public:
  RegistryService(RegistryStore& store, net::Endpoint listen);
  ~RegistryService();

  RegistryService(const RegistryService&) = delete;
  RegistryService& operator=(const RegistryService&) = delete;

  bool start();  // false on bind failure
  void stop();
  net::Endpoint endpoint() const { return endpoint_; }
  bool running() const { return running_.load(); }

  // Request dispatch, exposed for in-process use and tests.
  nlohmann::json handle_request(const nlohmann::json& request);

 private:
  void accept_loop();
  void session(net::TcpStream stream);

  RegistryStore& store_;
  net::Endpoint listen_;
  net::Endpoint endpoint_;
  net::TcpListener listener_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex sessions_mu_;
  std::vector<std::thread> sessions_;
};

}  // namespace mtn
