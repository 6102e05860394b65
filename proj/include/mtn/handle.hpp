#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtn {

// A persistent identifier: a naming-authority prefix and a local suffix.
// Canonical text form is "<prefix>/<suffix>", e.g. "hdl/pda".
//
// Both parts are restricted to the DNS-hostname-safe bytes
// [A-Za-z0-9 . - _] so any handle can be embedded in a DNS name. '/' is
// the separator and '~' is its DNS transliteration, so neither may occur
// inside a part; that keeps the transliteration invertible.
struct HandleName {
  std::string prefix;
  std::string suffix;

  std::string text() const { return prefix + "/" + suffix; }

  bool operator==(const HandleName&) const = default;
  auto operator<=>(const HandleName&) const = default;
};

class MalformedHandle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by dns_encode when a dot-separated segment of the transliterated
// form is empty or longer than the 63-octet DNS label limit.
class LabelTooLong : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// True if `part` is a nonempty run of bytes from [A-Za-z0-9 . - _].
bool handle_part_ok(std::string_view part);

// Splits at the first '/'. format(parse(text)) == text for accepted input.
HandleName parse_handle(std::string_view text);

// Canonical form with '/' replaced by '~' ("hdl/pda" -> "hdl~pda").
// Every dot-separated segment of the result must be a legal DNS label.
std::string dns_encode(const HandleName& h);

// Inverse of dns_encode: replaces the first '~' with '/', then parses.
// The input is the query name with the proxy-domain suffix already
// stripped; a name without '~' is not a handle.
HandleName dns_decode(std::string_view name);

std::string ascii_lower(std::string_view s);

// 48-bit link-layer address.
struct Mac48 {
  std::array<std::uint8_t, 6> octets{};

  // Accepts "aa:bb:cc:dd:ee:ff" (also '-' separators or none).
  static Mac48 parse(std::string_view text);
  std::string to_string() const;  // colon-separated lowercase hex
  std::string hex() const;        // 12 lowercase digits, no separators

  bool operator==(const Mac48&) const = default;
  auto operator<=>(const Mac48&) const = default;
};

// 128-bit service identifier.
struct Uuid128 {
  std::array<std::uint8_t, 16> octets{};

  // Accepts 32 hex digits, '-' separators allowed anywhere.
  static Uuid128 parse(std::string_view text);
  std::string hex() const;  // 32 lowercase digits

  bool operator==(const Uuid128&) const = default;
  auto operator<=>(const Uuid128&) const = default;
};

// Deterministic device handle: suffix "dev-" + 12 hex digits of the MAC.
// The same device always derives the same handle; distinct MACs derive
// distinct handles.
HandleName derive_device_handle(std::string_view prefix, const Mac48& mac);

// Deterministic service handle: suffix "svc-" + 32 hex digits of the UUID.
HandleName derive_service_handle(std::string_view prefix, const Uuid128& uuid);

}  // namespace mtn
