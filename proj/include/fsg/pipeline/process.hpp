#pragma once

// Byte-stream transports for the wire protocol and the generator that speaks it.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "fsg/pipeline/wire.hpp"

namespace fsg {

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
  /// Fills `out` completely or throws: PeerError on hang-up, TimeoutError when
  /// no byte arrives within the deadline.
  virtual void read_exact(std::span<std::uint8_t> out) = 0;
  /// Reads one whole frame. A clean hang-up before the first byte is reported
  /// as PeerError; a hang-up inside a frame is a FramingError.
  std::vector<std::uint8_t> read_frame() {
    std::vector<std::uint8_t> buf(wire::kHeaderSize);
    read_exact(buf);
    const wire::FrameHeader h = wire::parse_header(buf);
    const std::size_t n = wire::payload_size(h);
    buf.resize(wire::kHeaderSize + n);
    try {
      read_exact(std::span(buf).subspan(wire::kHeaderSize));
    } catch (const TimeoutError&) {
      throw;
    } catch (const PeerError&) {
      throw FramingError("stream ended inside a frame");
    }
    return buf;
  }
};

/// A pair of file descriptors (the read end may equal the write end).
class FdTransport : public Transport {
 public:
  FdTransport(int rfd, int wfd, std::chrono::milliseconds timeout = kDefaultTimeout, bool owns = true)
      : rfd_(rfd), wfd_(wfd), timeout_(timeout), owns_(owns) {
    std::signal(SIGPIPE, SIG_IGN);
  }
  ~FdTransport() override { close_fds(); }
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void write_all(std::span<const std::uint8_t> bytes) override {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::write(wfd_, bytes.data() + off, bytes.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PeerError(std::string("write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> out) override {
    std::size_t off = 0;
    while (off < out.size()) {
      pollfd p{rfd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(timeout_.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw PeerError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (r == 0) throw TimeoutError("no data within " + std::to_string(timeout_.count()) + " ms");
      const ssize_t n = ::read(rfd_, out.data() + off, out.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PeerError(std::string("read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw PeerError("connection closed");
      off += static_cast<std::size_t>(n);
    }
  }

  /// Half-closes the write direction.
  void close_write() {
    if (wfd_ >= 0 && wfd_ != rfd_) {
      ::close(wfd_);
      wfd_ = -1;
    } else if (wfd_ >= 0) {
      ::shutdown(wfd_, SHUT_WR);
    }
  }

 protected:
  void close_fds() {
    if (!owns_) return;
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    if (rfd_ >= 0) ::close(rfd_);
    rfd_ = wfd_ = -1;
  }

  int rfd_, wfd_;
  std::chrono::milliseconds timeout_;
  bool owns_;
};

/// Child process spoken to over its stdin/stdout.
class SubprocessTransport : public FdTransport {
 public:
  SubprocessTransport(const std::vector<std::string>& argv, std::chrono::milliseconds timeout = kDefaultTimeout)
      : FdTransport(-1, -1, timeout) {
    if (argv.empty()) throw InvalidArgument("empty command line for the generator process");
    int in[2], out[2];
    if (::pipe(in) != 0) throw PeerError("pipe failed");
    if (::pipe(out) != 0) {
      ::close(in[0]);
      ::close(in[1]);
      throw PeerError("pipe failed");
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) throw PeerError("fork failed");
    if (pid_ == 0) {
      ::dup2(in[0], STDIN_FILENO);
      ::dup2(out[1], STDOUT_FILENO);
      ::close(in[0]);
      ::close(in[1]);
      ::close(out[0]);
      ::close(out[1]);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    ::fcntl(in[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(out[0], F_SETFD, FD_CLOEXEC);
    wfd_ = in[1];
    rfd_ = out[0];
  }

  ~SubprocessTransport() override {
    close_fds();
    if (pid_ > 0) {
      int status = 0;
      // give the child a moment to exit on EOF before forcing it
      for (int k = 0; k < 50; ++k) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  pid_t pid() const noexcept { return pid_; }

 private:
  pid_t pid_ = -1;
};

/// TCP client connection.
class TcpTransport : public FdTransport {
 public:
  TcpTransport(const std::string& host, const std::string& port, std::chrono::milliseconds timeout = kDefaultTimeout)
      : FdTransport(-1, -1, timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
      throw PeerError("cannot resolve " + host + ":" + port);
    int fd = -1;
    for (addrinfo* a = res; a; a = a->ai_next) {
      fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw PeerError("cannot connect to " + host + ":" + port);
    rfd_ = wfd_ = fd;
  }
};

/// Generator on the far side of a transport. One request in flight at a time
/// (the owning GeneratorHandle serializes calls).
class RemoteGenerator : public Generator {
 public:
  RemoteGenerator(std::unique_ptr<Transport> t, std::string label) : t_(std::move(t)), label_(std::move(label)) {}

  GeneratorResponse run(const GeneratorRequest& req) override {
    if (broken_) throw PeerError("connection to '" + label_ + "' is unusable after an earlier failure");
    try {
      t_->write_all(wire::encode_request(req));
      const auto frame = t_->read_frame();
      return wire::decode_response(frame, req);
    } catch (const PeerError&) {
      broken_ = true;
      throw;
    } catch (const FramingError&) {
      broken_ = true;
      throw;
    }
  }

  std::string name() const override { return label_; }
  Transport& transport() { return *t_; }

 private:
  std::unique_ptr<Transport> t_;
  std::string label_;
  bool broken_ = false;
};

}  // namespace fsg
