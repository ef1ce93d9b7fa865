#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace screenchat {

enum class ErrorKind {
    MalformedJson,
    MissingRoot,
    InvalidBounds,
    IndexOutOfRange,
    BudgetExceeded,
    MissingTaskInput,
    BackendUnavailable,
    RateLimited,
    ReplayMiss,
    AuthMissing,
    StoreUnwritable,
    EmptyTaskList,
    LengthMismatch,
    MissingScreen,
    InvalidGoldIndex,
    LayoutError,
    InsufficientExemplars,
    ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::MissingRoot: return "MissingRoot";
    case ErrorKind::InvalidBounds: return "InvalidBounds";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::MissingTaskInput: return "MissingTaskInput";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::ReplayMiss: return "ReplayMiss";
    case ErrorKind::AuthMissing: return "AuthMissing";
    case ErrorKind::StoreUnwritable: return "StoreUnwritable";
    case ErrorKind::EmptyTaskList: return "EmptyTaskList";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::MissingScreen: return "MissingScreen";
    case ErrorKind::InvalidGoldIndex: return "InvalidGoldIndex";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::InsufficientExemplars: return "InsufficientExemplars";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// True for failures that come from a completion backend rather than input data.
constexpr bool is_backend_error(ErrorKind kind) noexcept {
    return kind == ErrorKind::BackendUnavailable || kind == ErrorKind::RateLimited ||
           kind == ErrorKind::ReplayMiss || kind == ErrorKind::AuthMissing;
}

} // namespace screenchat
