#include "mtn/handle.hpp"

#include <cctype>

namespace mtn {

namespace {

bool part_byte_ok(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

const char* kHexDigits = "0123456789abcdef";

}  // namespace

bool handle_part_ok(std::string_view part) {
  if (part.empty()) return false;
  for (char c : part) {
    if (!part_byte_ok(c)) return false;
  }
  return true;
}

HandleName parse_handle(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw MalformedHandle("handle has no '/' separator: " + std::string(text));
  }
  HandleName h{std::string(text.substr(0, slash)), std::string(text.substr(slash + 1))};
  if (!handle_part_ok(h.prefix)) {
    throw MalformedHandle("bad handle prefix: " + std::string(text));
  }
  if (!handle_part_ok(h.suffix)) {
    throw MalformedHandle("bad handle suffix: " + std::string(text));
  }
  return h;
}

std::string dns_encode(const HandleName& h) {
  std::string out = h.text();
  for (char& c : out) {
    if (c == '/') c = '~';
  }
  // Check the resulting dot-separated labels.
  std::size_t start = 0;
  while (true) {
    std::size_t dot = out.find('.', start);
    std::size_t len = (dot == std::string::npos ? out.size() : dot) - start;
    if (len == 0 || len > 63) {
      throw LabelTooLong("handle does not fit DNS labels: " + out);
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

HandleName dns_decode(std::string_view name) {
  auto tilde = name.find('~');
  if (tilde == std::string_view::npos) {
    throw MalformedHandle("name is not a transliterated handle: " + std::string(name));
  }
  std::string text(name);
  text[tilde] = '/';
  return parse_handle(text);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Mac48 Mac48::parse(std::string_view text) {
  Mac48 m;
  std::size_t n = 0;
  int hi = -1;
  for (char c : text) {
    if (c == ':' || c == '-') continue;
    int v = hex_nibble(c);
    if (v < 0) throw std::invalid_argument("bad MAC: " + std::string(text));
    if (hi < 0) {
      hi = v;
    } else {
      if (n >= m.octets.size()) throw std::invalid_argument("MAC too long: " + std::string(text));
      m.octets[n++] = static_cast<std::uint8_t>(hi << 4 | v);
      hi = -1;
    }
  }
  if (n != m.octets.size() || hi >= 0) {
    throw std::invalid_argument("MAC must be 6 octets: " + std::string(text));
  }
  return m;
}

std::string Mac48::to_string() const {
  std::string out;
  out.reserve(17);
  for (std::size_t i = 0; i < octets.size(); ++i) {
    if (i) out.push_back(':');
    out.push_back(kHexDigits[octets[i] >> 4]);
    out.push_back(kHexDigits[octets[i] & 0xf]);
  }
  return out;
}

std::string Mac48::hex() const {
  std::string out;
  out.reserve(12);
  for (std::uint8_t b : octets) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

Uuid128 Uuid128::parse(std::string_view text) {
  Uuid128 u;
  std::size_t n = 0;
  int hi = -1;
  for (char c : text) {
    if (c == '-') continue;
    int v = hex_nibble(c);
    if (v < 0) throw std::invalid_argument("bad UUID: " + std::string(text));
    if (hi < 0) {
      hi = v;
    } else {
      if (n >= u.octets.size()) throw std::invalid_argument("UUID too long: " + std::string(text));
      u.octets[n++] = static_cast<std::uint8_t>(hi << 4 | v);
      hi = -1;
    }
  }
  if (n != u.octets.size() || hi >= 0) {
    throw std::invalid_argument("UUID must be 16 octets: " + std::string(text));
  }
  return u;
}

std::string Uuid128::hex() const {
  std::string out;
  out.reserve(32);
  for (std::uint8_t b : octets) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

HandleName derive_device_handle(std::string_view prefix, const Mac48& mac) {
  return HandleName{std::string(prefix), "dev-" + mac.hex()};
}

HandleName derive_service_handle(std::string_view prefix, const Uuid128& uuid) {
  return HandleName{std::string(prefix), "svc-" + uuid.hex()};
}

}  // namespace mtn
