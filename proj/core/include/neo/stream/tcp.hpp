#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace neo::stream {

/// Minimal RAII TCP connection (blocking I/O).
class TcpConn {
 public:
  TcpConn() = default;
  explicit TcpConn(int fd) : fd_(fd) {}
  ~TcpConn();

  TcpConn(TcpConn&& other) noexcept;
  TcpConn& operator=(TcpConn&& other) noexcept;
  TcpConn(const TcpConn&) = delete;
  TcpConn& operator=(const TcpConn&) = delete;

  static TcpConn connect(const std::string& host, std::uint16_t port,
                         int retries = 20, int retry_ms = 100);

  void send_all(std::span<const std::uint8_t> data);
  /// Up to buf.size() bytes; 0 on orderly peer shutdown.
  std::size_t recv_some(std::span<std::uint8_t> buf);

  bool valid() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Binds 0.0.0.0:port; port 0 picks an ephemeral port.
  static TcpListener bind(std::uint16_t port);
  ~TcpListener();

  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  TcpConn accept();

  void close();

 private:
  TcpListener() = default;
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace neo::stream
