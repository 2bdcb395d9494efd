#ifndef FEATSIG_ERRORS_HPP
#define FEATSIG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace featsig {

// Error taxonomy mirrored by the CLI exit codes:
// config/invalid-argument -> 2, data -> 3, adapter protocol -> 4, internal -> 5.
enum class ErrorKind {
    invalid_argument,
    data,
    protocol,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error invalid_argument_error(const std::string& message) {
    return Error(ErrorKind::invalid_argument, message);
}
inline Error data_error(const std::string& message) {
    return Error(ErrorKind::data, message);
}
inline Error protocol_error(const std::string& message) {
    return Error(ErrorKind::protocol, message);
}
inline Error internal_error(const std::string& message) {
    return Error(ErrorKind::internal, message);
}

}  // namespace featsig

#endif  // FEATSIG_ERRORS_HPP
