#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

/// Invalid configuration: duplicate profile extensions, bad regexes,
/// missing capture groups, malformed config documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Network-level failure talking to a forge. Always retryable.
class TransportError : public std::runtime_error {
public:
    enum class Kind { Timeout, ServerError, Connection };

    TransportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Authentication rejected by the forge. Not retryable.
class CredentialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scan could not proceed (unknown sha, missing file listing).
class ScanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training or evaluation input is unusable (e.g. single-label corpus).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model file is corrupt, has an unknown version, or does not match
/// the feature vectors handed to it.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sentinel
