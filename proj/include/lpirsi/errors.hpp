#pragma once

#include <stdexcept>
#include <string>

namespace lpirsi {

/// Bad parameters or inputs outside the schemes' domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A peer broke the retrieval protocol (e.g. empty answer from a non-inference server).
struct ProtocolViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed the configured state-space budget.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Socket-level failure while talking to a server.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated wire frame.
struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lpirsi
