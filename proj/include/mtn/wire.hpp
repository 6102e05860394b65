#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mtn/net.hpp"
#include "json.hpp"

namespace mtn::wire {

// Frames are a 4-byte big-endian length followed by one UTF-8 JSON object.
// The same encoding is used on TCP sessions and in journal files.
constexpr std::size_t kMaxFrame = 1 << 20;

std::vector<std::uint8_t> encode_frame(const nlohmann::json& body);

struct ReadResult {
  enum class Kind { kOk, kEof, kMalformed } kind = Kind::kEof;
  nlohmann::json body;
};

// Reads one frame from a stream. kEof on clean close before any byte,
// kMalformed on truncation, oversize length or invalid JSON.
ReadResult read_frame(net::TcpStream& stream);

bool write_frame(net::TcpStream& stream, const nlohmann::json& body);

// One round trip on a fresh connection. Empty optional when the peer is
// unreachable or the reply is malformed.
std::optional<nlohmann::json> call(const net::Endpoint& ep, const nlohmann::json& request,
                                   int timeout_ms = 2000);

// Journal-style frame files.
void append_frame_file(int fd, const nlohmann::json& body);  // throws std::runtime_error
// Reads every complete frame; a torn final frame (partial write before a
// crash) is ignored.
std::vector<nlohmann::json> read_frame_file(const std::filesystem::path& path);

}  // namespace mtn::wire
