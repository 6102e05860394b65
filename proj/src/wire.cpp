#include "mtn/wire.hpp"

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mtn::wire {

namespace {
void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}
}  // namespace

std::vector<std::uint8_t> encode_frame(const nlohmann::json& body) {
  std::string text = body.dump();
  if (text.size() > kMaxFrame) throw std::runtime_error("frame body too large");
  std::vector<std::uint8_t> out;
  out.reserve(4 + text.size());
  put_u32be(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

ReadResult read_frame(net::TcpStream& stream) {
  std::uint8_t hdr[4];
  long first = stream.recv_some(hdr, 1);
  if (first == 0) return {ReadResult::Kind::kEof, {}};
  if (first < 0) return {ReadResult::Kind::kMalformed, {}};
  if (!stream.recv_all(hdr + 1, 3)) return {ReadResult::Kind::kMalformed, {}};

  std::uint32_t len = get_u32be(hdr);
  if (len > kMaxFrame) return {ReadResult::Kind::kMalformed, {}};
  std::string body(len, '\0');
  if (len > 0 && !stream.recv_all(body.data(), len)) {
    return {ReadResult::Kind::kMalformed, {}};
  }
  nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    return {ReadResult::Kind::kMalformed, {}};
  }
  return {ReadResult::Kind::kOk, std::move(parsed)};
}

bool write_frame(net::TcpStream& stream, const nlohmann::json& body) {
  auto bytes = encode_frame(body);
  return stream.send_all(bytes.data(), bytes.size());
}

std::optional<nlohmann::json> call(const net::Endpoint& ep, const nlohmann::json& request,
                                   int timeout_ms) {
  auto stream = net::TcpStream::connect(ep, timeout_ms);
  if (!stream) return std::nullopt;
  if (!write_frame(*stream, request)) return std::nullopt;
  auto reply = read_frame(*stream);
  if (reply.kind != ReadResult::Kind::kOk) return std::nullopt;
  return std::move(reply.body);
}

void append_frame_file(int fd, const nlohmann::json& body) {
  auto bytes = encode_frame(body);
  const std::uint8_t* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("journal write failed");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::vector<nlohmann::json> read_frame_file(const std::filesystem::path& path) {
  std::vector<nlohmann::json> frames;
  std::ifstream in(path, std::ios::binary);
  if (!in) return frames;
  while (true) {
    char hdr[4];
    if (!in.read(hdr, 4)) break;
    std::uint32_t len = get_u32be(reinterpret_cast<const std::uint8_t*>(hdr));
    if (len > kMaxFrame) break;
    std::string body(len, '\0');
    if (len > 0 && !in.read(body.data(), len)) break;  // torn tail
    nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_discarded()) break;
    frames.push_back(std::move(parsed));
  }
  return frames;
}

}  // namespace mtn::wire
