#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isolock {

// Base for all tool errors. The CLI maps these to exit code 1;
// anything else escaping to main is an internal error (exit 2).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ": " + reason),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class UnknownPrimitive : public Error {
public:
    explicit UnknownPrimitive(const std::string& name)
        : Error("unknown lock primitive: " + name) {}
};

class DuplicateStackId : public Error {
public:
    explicit DuplicateStackId(std::uint64_t id)
        : Error("duplicate stack id: " + std::to_string(id)) {}
};

class MissingStack : public Error {
public:
    explicit MissingStack(std::uint64_t id)
        : Error("event references unknown stack id " + std::to_string(id)) {}
};

class InvalidMeta : public Error {
public:
    explicit InvalidMeta(const std::string& msg) : Error("invalid metadata: " + msg) {}
};

class SessionMismatch : public Error {
public:
    explicit SessionMismatch(const std::string& msg)
        : Error("session mismatch: " + msg) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& msg) : Error("empty input: " + msg) {}
};

class EmptyTrace : public Error {
public:
    explicit EmptyTrace(const std::string& msg) : Error("empty trace: " + msg) {}
};

class UnmappablePath : public Error {
public:
    explicit UnmappablePath(const std::string& path)
        : Error("cannot derive subsystem from path: \"" + path + "\"") {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("schema error: " + msg) {}
};

class DanglingReference : public Error {
public:
    DanglingReference(const std::string& kind, const std::string& name)
        : Error("dangling " + kind + " reference: " + name) {}
};

class NotResolved : public Error {
public:
    explicit NotResolved(const std::string& msg) : Error("not resolved: " + msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

}  // namespace isolock
