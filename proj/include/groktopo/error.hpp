#pragma once

#include <stdexcept>
#include <string>

namespace groktopo {

enum class ErrorKind {
    Config,       // invalid argument / configuration value
    Io,           // filesystem or serialization failure
    Contract,     // violated precondition or internal invariant
    Shape,        // tensor shape mismatch
    Index,        // index out of range
    Numerical,    // NaN, degenerate geometry, undefined statistic
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Process exit code for an error kind: 2 config, 3 I/O, 4 contract violation.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
            return 2;
        case ErrorKind::Io:
            return 3;
        default:
            return 4;
    }
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace groktopo
