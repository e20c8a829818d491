#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tasql {

enum class ErrorKind {
  Io,
  Parse,
  Precondition,
  Config,
  ReplayMiss,
  Backend,
  SqlParse,
  Unsupported,
  GoldSchema,
  SymbolicParse,
  UnknownFunction,
  JoinInference,
  Compile,
  Synthesis,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error(ErrorKind::Io, message) {}
};

/// Malformed dataset/cache input. Carries the byte offset reported by the
/// JSON parser when one is available.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(ErrorKind::Parse, message), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

class PreconditionError : public Error {
public:
  explicit PreconditionError(const std::string& message) : Error(ErrorKind::Precondition, message) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message) : Error(ErrorKind::Config, message) {}
};

class ReplayMissError : public Error {
public:
  explicit ReplayMissError(const std::string& prompt_hash)
      : Error(ErrorKind::ReplayMiss, "no cached response for prompt hash " + prompt_hash),
        prompt_hash_(prompt_hash) {}

  const std::string& prompt_hash() const { return prompt_hash_; }

private:
  std::string prompt_hash_;
};

class BackendError : public Error {
public:
  explicit BackendError(const std::string& message) : Error(ErrorKind::Backend, message) {}
};

class SqlParseError : public Error {
public:
  SqlParseError(const std::string& message, std::size_t position)
      : Error(ErrorKind::SqlParse, message + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string& message) : Error(ErrorKind::Unsupported, message) {}
};

class GoldSchemaError : public Error {
public:
  explicit GoldSchemaError(const std::string& message) : Error(ErrorKind::GoldSchema, message) {}
};

class SymbolicParseError : public Error {
public:
  explicit SymbolicParseError(const std::string& message) : Error(ErrorKind::SymbolicParse, message) {}
};

class UnknownFunctionError : public Error {
public:
  explicit UnknownFunctionError(const std::string& function)
      : Error(ErrorKind::UnknownFunction, "unknown symbolic function '" + function + "'"),
        function_(function) {}

  const std::string& function() const { return function_; }

private:
  std::string function_;
};

/// Required tables span more than one foreign-key component.
class JoinInferenceError : public Error {
public:
  JoinInferenceError(const std::string& message, std::vector<std::vector<std::string>> components)
      : Error(ErrorKind::JoinInference, message), components_(std::move(components)) {}

  const std::vector<std::vector<std::string>>& components() const { return components_; }

private:
  std::vector<std::vector<std::string>> components_;
};

class CompileError : public Error {
public:
  explicit CompileError(const std::string& message) : Error(ErrorKind::Compile, message) {}
};

/// Unrecoverable plan synthesis failure. Keeps every intermediate artifact so
/// a failed example can be inspected offline.
class SynthesisError : public Error {
public:
  struct Artifacts {
    std::string prompt;
    std::string raw_response;
    std::string retry_response;
    std::string detail;
  };

  SynthesisError(const std::string& message, Artifacts artifacts)
      : Error(ErrorKind::Synthesis, message), artifacts_(std::move(artifacts)) {}

  const Artifacts& artifacts() const { return artifacts_; }

private:
  Artifacts artifacts_;
};

}  // namespace tasql
