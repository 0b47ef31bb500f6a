#pragma once

#include <stdexcept>
#include <string>

namespace critbubble {

// One exception type for the whole library; `kind` maps 1:1 onto the C API
// status codes.
class Error : public std::runtime_error {
public:
    enum class Kind {
        invalid_argument,  // bad parameter, precondition violated
        parse,             // config / input file syntax
        regime,            // quantity undefined in this (n,k) regime
        numeric,           // quadrature / solver failure
        io,                // file system
        internal
    };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw Error(Error::Kind::invalid_argument, msg);
}
[[noreturn]] inline void fail_parse(const std::string& msg) {
    throw Error(Error::Kind::parse, msg);
}
[[noreturn]] inline void fail_regime(const std::string& msg) {
    throw Error(Error::Kind::regime, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw Error(Error::Kind::numeric, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(Error::Kind::io, msg);
}

} // namespace critbubble
