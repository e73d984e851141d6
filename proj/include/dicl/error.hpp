// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dicl {

/// Process exit codes used by the command-line tool. Each exception type
/// below maps onto exactly one of these.
enum class ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kData = 3,
    kMissingPrerequisite = 4,
    kConfigMismatch = 5,
    kProvider = 6,
    kParse = 7,
    kLocked = 8,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::kInternal)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Malformed input data: bad records, dangling references, invalid bundles.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what, ExitCode::kData) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(what, ExitCode::kUsage) {}
};

class PrerequisiteError : public Error {
public:
    explicit PrerequisiteError(const std::string& what)
        : Error(what, ExitCode::kMissingPrerequisite) {}
};

class ConfigMismatchError : public Error {
public:
    explicit ConfigMismatchError(const std::string& what)
        : Error(what, ExitCode::kConfigMismatch) {}
};

class LockError : public Error {
public:
    explicit LockError(const std::string& what) : Error(what, ExitCode::kLocked) {}
};

/// Model output that does not follow the requested answer format.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what, ExitCode::kParse) {}
};

/// Any failure talking to a chat or embedding backend. `transient()` marks
/// failures worth retrying (timeouts, 429, 5xx).
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool transient)
        : Error(what, ExitCode::kProvider), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

}  // namespace dicl
