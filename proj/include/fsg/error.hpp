#pragma once

#include <stdexcept>
#include <string>

namespace fsg {

/// Error classes surface as distinct process exit codes in the CLI.
enum class ErrorKind {
  io = 2,
  validation = 3,
  convergence = 4,
  protocol = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// Query landed in a triangle made only of boundary corners.
class NoViewError : public Error {
 public:
  explicit NoViewError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::protocol, what) {}
};

/// Bytes on the wire do not form a valid frame.
class FramingError : public ProtocolError {
 public:
  explicit FramingError(const std::string& what) : ProtocolError("framing: " + what) {}
};

/// The peer died, hung up, timed out or reported a failure.
class PeerError : public ProtocolError {
 public:
  explicit PeerError(const std::string& what) : ProtocolError("peer: " + what) {}
};

class TimeoutError : public PeerError {
 public:
  explicit TimeoutError(const std::string& what) : PeerError("timeout: " + what) {}
};

/// A pipeline stage failed; keeps the error class of the underlying cause.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause)
      : Error(cause.kind(), "stage '" + stage + "' failed: " + cause.what()),
        stage_(std::move(stage)) {}
  PipelineError(std::string stage, const std::string& cause, ErrorKind kind = ErrorKind::validation)
      : Error(kind, "stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace fsg
