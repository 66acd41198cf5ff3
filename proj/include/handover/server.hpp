#pragma once

// Session host over a TCP stream socket (one thread per connection) or over a
// pair of standard streams.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "handover/protocol.hpp"

namespace handover {

struct ListenAddress {
  std::string host{"127.0.0.1"};
  int port{5555};
};

/// Parses `host:port` or `port`. Port 0 asks the OS for a free port.
inline ListenAddress parse_listen_address(const std::string& s) {
  ListenAddress a;
  const auto colon = s.rfind(':');
  std::string port = s;
  if (colon != std::string::npos) {
    a.host = s.substr(0, colon);
    port = s.substr(colon + 1);
    if (a.host.empty()) throw InvalidConfig("listen address '" + s + "' has an empty host");
  }
  std::size_t used = 0;
  int p = -1;
  try {
    p = std::stoi(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != port.size() || p < 0 || p > 65535)
    throw InvalidConfig("listen address '" + s + "' has an invalid port");
  a.port = p;
  return a;
}

/// Runs one session over line-oriented streams until close or end of input.
inline void serve_stream(std::istream& in, std::ostream& out, const AppConfig& cfg, std::string id = "stdio") {
  Session session(std::move(id), cfg);
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n' << std::flush;
  }
}

class TcpServer {
 public:
  /// Binds and listens immediately; throws std::runtime_error if the address
  /// cannot be bound (e.g. port busy).
  TcpServer(const ListenAddress& addr, AppConfig cfg) : cfg_(std::move(cfg)) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(addr.port);
    if (int rc = ::getaddrinfo(addr.host.c_str(), port.c_str(), &hints, &res); rc != 0)
      throw std::runtime_error("cannot resolve listen host '" + addr.host + "': " + ::gai_strerror(rc));
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ < 0) {
      ::freeaddrinfo(res);
      throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    }
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 64) != 0) {
      const std::string err = std::strerror(errno);
      ::freeaddrinfo(res);
      ::close(fd_);
      throw std::runtime_error("cannot listen on " + addr.host + ":" + port + ": " + err);
    }
    ::freeaddrinfo(res);
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  ~TcpServer() {
    stop();
    if (fd_ >= 0) ::close(fd_);
  }

  [[nodiscard]] int port() const { return port_; }

  /// Accepts connections until stop() is called.
  void run() {
    while (!stopping_) {
      const int client = ::accept(fd_, nullptr, nullptr);
      if (client < 0) {
        if (stopping_) break;
        if (errno == EINTR || errno == ECONNABORTED) continue;
        break;
      }
      std::lock_guard lock(mutex_);
      if (stopping_) {
        ::close(client);
        break;
      }
      clients_.insert(client);
      const std::string id = "s" + std::to_string(++sessions_);
      workers_.emplace_back([this, client, id] { connection(client, id); });
    }
  }

  /// Unblocks run(), disconnects every client and joins the workers.
  void stop() {
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      if (stopping_.exchange(true)) return;
      ::shutdown(fd_, SHUT_RDWR);
      for (int c : clients_) ::shutdown(c, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
  }

 private:
  void connection(int client, const std::string& id) {
    Session session(id, cfg_);
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open && !session.closed()) {
      const ssize_t n = ::recv(client, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while (open && !session.closed() && (nl = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        open = send_all(client, session.handle_line(line) + "\n");
      }
    }
    std::lock_guard lock(mutex_);
    clients_.erase(client);
    ::close(client);
  }

  static bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  AppConfig cfg_;
  int fd_{-1};
  int port_{0};
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::set<int> clients_;
  std::vector<std::thread> workers_;
  std::size_t sessions_{0};
};

/// Minimal blocking line client, used by tests and scripted drivers.
class LineClient {
 public:
  LineClient(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string p = std::to_string(port);
    if (::getaddrinfo(host.c_str(), p.c_str(), &hints, &res) != 0)
      throw std::runtime_error("cannot resolve '" + host + "'");
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
      if (fd_ >= 0) ::close(fd_);
      throw std::runtime_error("cannot connect to " + host + ":" + p);
    }
  }
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;
  ~LineClient() {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(const std::string& line) {
    const std::string data = line + "\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) throw std::runtime_error("send failed");
      sent += static_cast<std::size_t>(n);
    }
  }

  /// Empty string on end of stream.
  std::string read_line() {
    std::size_t nl;
    while ((nl = buffer_.find('\n')) == std::string::npos) {
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return {};
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    return line;
  }

  std::string request(const std::string& line) {
    send_line(line);
    return read_line();
  }

 private:
  int fd_{-1};
  std::string buffer_;
};

}  // namespace handover
