#pragma once

#include <stdexcept>
#include <string>

namespace expertprompt {

// Exit codes used by the CLI. Library code throws the matching exception
// type; the CLI maps it at the top level.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitBackendExhausted = 4,
    kExitParseFailureCap = 5,
};

/// Invalid configuration or precondition violation detected before any work.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input data violates a documented invariant (duplicate ids, id mismatch, ...).
class ValidationError : public ConfigError {
public:
    explicit ValidationError(const std::string& msg) : ConfigError(msg) {}
};

/// A required template placeholder is unbound, or a variable has no slot.
class TemplateError : public ConfigError {
public:
    explicit TemplateError(const std::string& msg) : ConfigError(msg) {}
};

/// Filesystem failure, or a malformed input file.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed record in a line-delimited file; carries the 1-based line number.
class RecordParseError : public IoError {
public:
    RecordParseError(const std::string& path, size_t line, const std::string& what)
        : IoError(path + ":" + std::to_string(line) + ": " + what),
          path_(path),
          line_(line) {}

    const std::string& path() const { return path_; }
    size_t line() const { return line_; }

private:
    std::string path_;
    size_t line_;
};

/// Backend rejected the credentials; never retried.
class AuthError : public std::runtime_error {
public:
    explicit AuthError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Provider returned a payload that does not match the chat-completion shape.
/// Retains the raw body for debugging.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(const std::string& msg, std::string raw_body)
        : std::runtime_error(msg), raw_body_(std::move(raw_body)) {}

    const std::string& raw_body() const { return raw_body_; }

private:
    std::string raw_body_;
};

/// A batch ended with items still failing after the retry pass.
class BackendExhaustedError : public std::runtime_error {
public:
    explicit BackendExhaustedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Judge replies failed to parse above the configured cap.
class ParseFailureCapError : public std::runtime_error {
public:
    explicit ParseFailureCapError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace expertprompt
