#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtn::net {

// "host:port" with numeric hosts; v6 literals use brackets, "[::1]:5300".
struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  static Endpoint parse(std::string_view text);  // throws std::invalid_argument
  std::string to_string() const;

  bool operator==(const Endpoint&) const = default;
};

// Move-only file descriptor owner.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd();
  Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Fd& operator=(Fd&& other) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset();

 private:
  int fd_ = -1;
};

class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  static std::optional<TcpStream> connect(const Endpoint& ep, int timeout_ms = 2000);

  bool valid() const { return fd_.valid(); }
  bool send_all(const void* data, std::size_t len);
  // False on EOF, error or timeout before len bytes arrive.
  bool recv_all(void* data, std::size_t len);
  // Bytes read (0 on EOF), -1 on error/timeout.
  long recv_some(void* data, std::size_t len);
  void set_recv_timeout_ms(int ms);
  void close();
  int fd() const { return fd_.get(); }

 private:
  Fd fd_;
};

class TcpListener {
 public:
  static std::optional<TcpListener> bind(const Endpoint& ep, int backlog = 16);

  // Blocks until a connection arrives or close() is called from another
  // thread (then returns nullopt).
  std::optional<TcpStream> accept();
  Endpoint local_endpoint() const { return local_; }
  void close();
  bool valid() const { return fd_.valid(); }

  TcpListener() = default;
  TcpListener(TcpListener&&) = default;
  TcpListener& operator=(TcpListener&&) = default;

 private:
  Fd fd_;
  Fd wake_rd_;
  Fd wake_wr_;
  Endpoint local_;
};

class UdpSocket {
 public:
  static std::optional<UdpSocket> bind(const Endpoint& ep);
  static std::optional<UdpSocket> open(bool v6);  // unbound client socket

  Endpoint local_endpoint() const { return local_; }
  bool send_to(const Endpoint& dst, const void* data, std::size_t len);
  // Returns payload and source; nullopt on timeout or closed socket.
  struct Datagram {
    std::vector<std::uint8_t> payload;
    Endpoint source;
  };
  std::optional<Datagram> recv_from(int timeout_ms);
  void close();
  bool valid() const { return fd_.valid(); }

  UdpSocket() = default;
  UdpSocket(UdpSocket&&) = default;
  UdpSocket& operator=(UdpSocket&&) = default;

 private:
  Fd fd_;
  Fd wake_rd_;
  Fd wake_wr_;
  Endpoint local_;
  bool v6_ = false;
};

}  // namespace mtn::net
