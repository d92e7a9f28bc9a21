#pragma once

#include <stdexcept>
#include <string>

namespace ggrf {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
    input,       // unreadable files, malformed cells, bad arguments
    degenerate,  // data that make a statistic undefined
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what)
        : Error(ErrorKind::degenerate, what) {}
};

}  // namespace ggrf
