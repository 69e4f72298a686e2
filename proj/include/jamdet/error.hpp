#pragma once

#include <stdexcept>
#include <string>

namespace jamdet {

// Exit/status codes shared by the C API and the CLI.
enum class ErrorKind : int { Config = 1, Io = 2, Domain = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

}  // namespace jamdet
