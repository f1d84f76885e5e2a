#pragma once

#include <stdexcept>
#include <string>

namespace hypobench {

// CLI exit-code mapping: UsageError -> 1, ProviderError -> 2, DataError -> 3.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProviderErrorKind {
    transport,       // connection failure, timeout
    server,          // 5xx from the backend
    rate_limit,      // 429 / quota exhaustion; callers may pause and resume
    protocol,        // malformed backend payload (e.g. embedding dimension mismatch)
    empty_response,  // backend returned an empty completion
    unavailable,     // retries exhausted
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ProviderErrorKind kind() const { return kind_; }

    bool retryable() const {
        return kind_ == ProviderErrorKind::transport || kind_ == ProviderErrorKind::server ||
               kind_ == ProviderErrorKind::rate_limit;
    }

private:
    ProviderErrorKind kind_;
};

inline const char* to_string(ProviderErrorKind k) {
    switch (k) {
        case ProviderErrorKind::transport: return "transport";
        case ProviderErrorKind::server: return "server";
        case ProviderErrorKind::rate_limit: return "rate-limit";
        case ProviderErrorKind::protocol: return "protocol";
        case ProviderErrorKind::empty_response: return "empty-response";
        case ProviderErrorKind::unavailable: return "provider-unavailable";
    }
    return "unknown";
}

}  // namespace hypobench
