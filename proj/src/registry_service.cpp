#include "mtn/registry_service.hpp"

#include "mtn/wire.hpp"

namespace mtn {

namespace {

nlohmann::json status_reply(RegistryStatus status, const std::string& message = "") {
  nlohmann::json out{{"status", std::string(to_string(status))}};
  if (!message.empty()) out["error"] = message;
  return out;
}

}  // namespace

RegistryService::RegistryService(RegistryStore& store, net::Endpoint listen)
    : store_(store), listen_(std::move(listen)) {}

RegistryService::~RegistryService() { stop(); }

bool RegistryService::start() {
  auto listener = net::TcpListener::bind(listen_);
  if (!listener) return false;
  listener_ = std::move(*listener);
  endpoint_ = listener_.local_endpoint();
  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
  return true;
}

void RegistryService::stop() {
  bool was_running = running_.exchange(false);
  listener_.close();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(sessions_mu_);
    sessions.swap(sessions_);
  }
  for (auto& t : sessions) {
    if (t.joinable()) t.join();
  }
  (void)was_running;
}

void RegistryService::accept_loop() {
  while (running_.load()) {
    auto stream = listener_.accept();
    if (!stream) break;
    stream->set_recv_timeout_ms(200);
    std::lock_guard lock(sessions_mu_);
    sessions_.emplace_back([this, s = std::move(*stream)]() mutable { session(std::move(s)); });
  }
}

void RegistryService::session(net::TcpStream stream) {
  while (running_.load()) {
    auto frame = wire::read_frame(stream);
    if (frame.kind == wire::ReadResult::Kind::kEof) break;
    if (frame.kind == wire::ReadResult::Kind::kMalformed) {
      // Short receive timeouts surface here too; only answer genuine
      // garbage, then drop the session either way.
      wire::write_frame(stream, status_reply(RegistryStatus::kProtocolError, "bad frame"));
      break;
    }
    nlohmann::json reply = handle_request(frame.body);
    if (!wire::write_frame(stream, reply)) break;
  }
  stream.close();
}

nlohmann::json RegistryService::handle_request(const nlohmann::json& request) {
  std::string op;
  if (!request.contains("op") || !request["op"].is_string()) {
    return status_reply(RegistryStatus::kProtocolError, "missing op");
  }
  op = request["op"].get<std::string>();

  if (op == "PING") {
    return status_reply(RegistryStatus::kOk);
  }

  HandleName handle;
  try {
    if (!request.contains("handle") || !request["handle"].is_string()) {
      throw MalformedHandle("missing handle");
    }
    handle = parse_handle(request["handle"].get<std::string>());
  } catch (const std::exception& e) {
    return status_reply(RegistryStatus::kProtocolError, e.what());
  }

  if (op == "RESOLVE") {
    std::optional<std::string> filter;
    if (request.contains("type")) {
      if (!request["type"].is_string()) {
        return status_reply(RegistryStatus::kProtocolError, "type must be a string");
      }
      filter = request["type"].get<std::string>();
    }
    ResolveResult res = store_.resolve(handle, filter);
    nlohmann::json out = status_reply(res.status);
    out["version"] = res.version;
    out["values"] = values_to_json(res.values);
    return out;
  }

  if (op == "CHALLENGE") {
    Challenge ch = store_.issue_challenge(handle);
    nlohmann::json out = status_reply(RegistryStatus::kOk);
    out["nonce_b64"] = crypto::b64_encode(ch.nonce.data(), ch.nonce.size());
    return out;
  }

  if (op == "CREATE" || op == "UPDATE" || op == "DELETE") {
    SignedRequest req;
    req.op = op == "CREATE" ? OpKind::kCreate
                            : (op == "UPDATE" ? OpKind::kUpdate : OpKind::kDelete);
    req.handle = handle;
    try {
      if (request.contains("values")) req.values = values_from_json(request["values"]);
      auto nonce = crypto::b64_decode(request.at("nonce_b64").get<std::string>());
      if (nonce.size() != req.nonce.size()) throw std::invalid_argument("nonce must be 32 bytes");
      std::copy(nonce.begin(), nonce.end(), req.nonce.begin());
      req.signature = crypto::b64_decode(request.at("sig_b64").get<std::string>());
    } catch (const std::exception& e) {
      return status_reply(RegistryStatus::kProtocolError, e.what());
    }
    ApplyResult res = store_.apply_signed(req);
    nlohmann::json out = status_reply(res.status, res.message);
    out["version"] = res.version;
    return out;
  }

  return status_reply(RegistryStatus::kProtocolError, "unknown op " + op);
}

}  // namespace mtn
