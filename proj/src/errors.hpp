#pragma once

#include <stdexcept>
#include <string>

namespace crl {

enum class ErrorCode {
    invalid_argument = 1,
    io = 2,
    format = 3,
    no_convergence = 4,
    guard = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace crl
