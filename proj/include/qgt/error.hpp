#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qgt {

enum class ErrorCode {
    InvalidParams,
    IndexOutOfRange,
    OutcomeOutOfRange,
    ExactCapExceeded,
    Inconsistent,
    MissingPin,
    NotEnoughItems,
    BaseOutputTooLarge,
    DegenerateSplit,
    TooLarge,
    DomainError,
    InvalidSpec,
    Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::OutcomeOutOfRange: return "OutcomeOutOfRange";
        case ErrorCode::ExactCapExceeded: return "ExactCapExceeded";
        case ErrorCode::Inconsistent: return "Inconsistent";
        case ErrorCode::MissingPin: return "MissingPin";
        case ErrorCode::NotEnoughItems: return "NotEnoughItems";
        case ErrorCode::BaseOutputTooLarge: return "BaseOutputTooLarge";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const char* what) {
    if (!cond) throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace qgt
