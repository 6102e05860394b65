#include "mtn/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace mtn::net {

namespace {

struct SockAddr {
  sockaddr_storage ss{};
  socklen_t len = 0;
  bool v6 = false;
};

SockAddr to_sockaddr(const Endpoint& ep) {
  SockAddr sa;
  in6_addr a6{};
  in_addr a4{};
  if (inet_pton(AF_INET6, ep.host.c_str(), &a6) == 1) {
    auto* s = reinterpret_cast<sockaddr_in6*>(&sa.ss);
    s->sin6_family = AF_INET6;
    s->sin6_addr = a6;
    s->sin6_port = htons(ep.port);
    sa.len = sizeof(sockaddr_in6);
    sa.v6 = true;
  } else if (inet_pton(AF_INET, ep.host.c_str(), &a4) == 1) {
    auto* s = reinterpret_cast<sockaddr_in*>(&sa.ss);
    s->sin_family = AF_INET;
    s->sin_addr = a4;
    s->sin_port = htons(ep.port);
    sa.len = sizeof(sockaddr_in);
  } else {
    throw std::invalid_argument("endpoint host must be a numeric address: " + ep.host);
  }
  return sa;
}

Endpoint from_sockaddr(const sockaddr_storage& ss) {
  Endpoint ep;
  char buf[INET6_ADDRSTRLEN] = {0};
  if (ss.ss_family == AF_INET6) {
    const auto* s = reinterpret_cast<const sockaddr_in6*>(&ss);
    inet_ntop(AF_INET6, &s->sin6_addr, buf, sizeof buf);
    ep.host = buf;
    ep.port = ntohs(s->sin6_port);
  } else {
    const auto* s = reinterpret_cast<const sockaddr_in*>(&ss);
    inet_ntop(AF_INET, &s->sin_addr, buf, sizeof buf);
    ep.host = buf;
    ep.port = ntohs(s->sin_port);
  }
  return ep;
}

bool make_wake_pipe(Fd& rd, Fd& wr) {
  int p[2];
  if (pipe(p) != 0) return false;
  fcntl(p[0], F_SETFL, O_NONBLOCK);
  fcntl(p[1], F_SETFL, O_NONBLOCK);
  rd = Fd(p[0]);
  wr = Fd(p[1]);
  return true;
}

// Waits for readability of fd, interruptible by wake pipe. Returns false
// when woken or on error.
bool wait_readable(int fd, int wake_fd, int timeout_ms) {
  pollfd fds[2];
  fds[0].fd = fd;
  fds[0].events = POLLIN;
  fds[1].fd = wake_fd;
  fds[1].events = POLLIN;
  nfds_t n = wake_fd >= 0 ? 2 : 1;
  while (true) {
    int rc = poll(fds, n, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    if (rc == 0) return false;  // timeout
    if (n == 2 && (fds[1].revents & POLLIN)) return false;
    if (fds[0].revents) return true;
  }
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  if (!text.empty() && text.front() == '[') {
    auto close = text.find(']');
    if (close == std::string_view::npos || close + 1 >= text.size() || text[close + 1] != ':') {
      throw std::invalid_argument("bad endpoint: " + std::string(text));
    }
    ep.host = std::string(text.substr(1, close - 1));
    text = text.substr(close + 2);
  } else {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("endpoint needs host:port: " + std::string(text));
    }
    ep.host = std::string(text.substr(0, colon));
    text = text.substr(colon + 1);
  }
  int port = 0;
  if (text.empty()) throw std::invalid_argument("endpoint missing port");
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad endpoint port");
    port = port * 10 + (c - '0');
    if (port > 65535) throw std::invalid_argument("endpoint port out of range");
  }
  ep.port = static_cast<std::uint16_t>(port);
  if (ep.host.empty()) throw std::invalid_argument("endpoint missing host");
  return ep;
}

std::string Endpoint::to_string() const {
  if (host.find(':') != std::string::npos) {
    return "[" + host + "]:" + std::to_string(port);
  }
  return host + ":" + std::to_string(port);
}

Fd::~Fd() { reset(); }

Fd& Fd::operator=(Fd&& other) noexcept {
  if (this != &other) {
    reset();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Fd::reset() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::optional<TcpStream> TcpStream::connect(const Endpoint& ep, int timeout_ms) {
  SockAddr sa;
  try {
    sa = to_sockaddr(ep);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  Fd fd(socket(sa.v6 ? AF_INET6 : AF_INET, SOCK_STREAM, 0));
  if (!fd.valid()) return std::nullopt;

  // Non-blocking connect so we can honor the timeout.
  int flags = fcntl(fd.get(), F_GETFL, 0);
  fcntl(fd.get(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd.get(), reinterpret_cast<sockaddr*>(&sa.ss), sa.len);
  if (rc != 0 && errno != EINPROGRESS) return std::nullopt;
  if (rc != 0) {
    pollfd pfd{fd.get(), POLLOUT, 0};
    rc = poll(&pfd, 1, timeout_ms);
    if (rc <= 0) return std::nullopt;
    int err = 0;
    socklen_t len = sizeof err;
    getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) return std::nullopt;
  }
  fcntl(fd.get(), F_SETFL, flags);

  int one = 1;
  setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  TcpStream s(std::move(fd));
  s.set_recv_timeout_ms(timeout_ms);
  return s;
}

bool TcpStream::send_all(const void* data, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  while (len > 0) {
    ssize_t n = ::send(fd_.get(), p, len, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

bool TcpStream::recv_all(void* data, std::size_t len) {
  auto* p = static_cast<std::uint8_t*>(data);
  while (len > 0) {
    ssize_t n = ::recv(fd_.get(), p, len, 0);
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

long TcpStream::recv_some(void* data, std::size_t len) {
  while (true) {
    ssize_t n = ::recv(fd_.get(), data, len, 0);
    if (n < 0 && errno == EINTR) continue;
    return n;
  }
}

void TcpStream::set_recv_timeout_ms(int ms) {
  timeval tv{};
  tv.tv_sec = ms / 1000;
  tv.tv_usec = (ms % 1000) * 1000;
  setsockopt(fd_.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

void TcpStream::close() { fd_.reset(); }

std::optional<TcpListener> TcpListener::bind(const Endpoint& ep, int backlog) {
  SockAddr sa;
  try {
    sa = to_sockaddr(ep);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  Fd fd(socket(sa.v6 ? AF_INET6 : AF_INET, SOCK_STREAM, 0));
  if (!fd.valid()) return std::nullopt;
  int one = 1;
  setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&sa.ss), sa.len) != 0) return std::nullopt;
  if (::listen(fd.get(), backlog) != 0) return std::nullopt;

  sockaddr_storage actual{};
  socklen_t alen = sizeof actual;
  getsockname(fd.get(), reinterpret_cast<sockaddr*>(&actual), &alen);

  TcpListener l;
  if (!make_wake_pipe(l.wake_rd_, l.wake_wr_)) return std::nullopt;
  l.fd_ = std::move(fd);
  l.local_ = from_sockaddr(actual);
  return l;
}

std::optional<TcpStream> TcpListener::accept() {
  if (!fd_.valid()) return std::nullopt;
  if (!wait_readable(fd_.get(), wake_rd_.get(), -1)) return std::nullopt;
  int cfd = ::accept(fd_.get(), nullptr, nullptr);
  if (cfd < 0) return std::nullopt;
  return TcpStream(Fd(cfd));
}

void TcpListener::close() {
  if (wake_wr_.valid()) {
    char b = 1;
    [[maybe_unused]] ssize_t n = ::write(wake_wr_.get(), &b, 1);
  }
  fd_.reset();
}

std::optional<UdpSocket> UdpSocket::bind(const Endpoint& ep) {
  SockAddr sa;
  try {
    sa = to_sockaddr(ep);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  Fd fd(socket(sa.v6 ? AF_INET6 : AF_INET, SOCK_DGRAM, 0));
  if (!fd.valid()) return std::nullopt;
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&sa.ss), sa.len) != 0) return std::nullopt;

  sockaddr_storage actual{};
  socklen_t alen = sizeof actual;
  getsockname(fd.get(), reinterpret_cast<sockaddr*>(&actual), &alen);

  UdpSocket u;
  if (!make_wake_pipe(u.wake_rd_, u.wake_wr_)) return std::nullopt;
  u.fd_ = std::move(fd);
  u.local_ = from_sockaddr(actual);
  u.v6_ = sa.v6;
  return u;
}

std::optional<UdpSocket> UdpSocket::open(bool v6) {
  Fd fd(socket(v6 ? AF_INET6 : AF_INET, SOCK_DGRAM, 0));
  if (!fd.valid()) return std::nullopt;
  UdpSocket u;
  if (!make_wake_pipe(u.wake_rd_, u.wake_wr_)) return std::nullopt;
  u.fd_ = std::move(fd);
  u.v6_ = v6;
  return u;
}

bool UdpSocket::send_to(const Endpoint& dst, const void* data, std::size_t len) {
  SockAddr sa;
  try {
    sa = to_sockaddr(dst);
  } catch (const std::invalid_argument&) {
    return false;
  }
  ssize_t n = ::sendto(fd_.get(), data, len, MSG_NOSIGNAL,
                       reinterpret_cast<sockaddr*>(&sa.ss), sa.len);
  return n == static_cast<ssize_t>(len);
}

std::optional<UdpSocket::Datagram> UdpSocket::recv_from(int timeout_ms) {
  if (!fd_.valid()) return std::nullopt;
  if (!wait_readable(fd_.get(), wake_rd_.get(), timeout_ms)) return std::nullopt;
  std::vector<std::uint8_t> buf(65536);
  sockaddr_storage src{};
  socklen_t slen = sizeof src;
  ssize_t n = ::recvfrom(fd_.get(), buf.data(), buf.size(), 0,
                         reinterpret_cast<sockaddr*>(&src), &slen);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return Datagram{std::move(buf), from_sockaddr(src)};
}

void UdpSocket::close() {
  if (wake_wr_.valid()) {
    char b = 1;
    [[maybe_unused]] ssize_t n = ::write(wake_wr_.get(), &b, 1);
  }
  fd_.reset();
}

}  // namespace mtn::net
