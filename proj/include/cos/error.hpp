// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace chainshot {

// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition. CLI exit code 2.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Filesystem or ingestion failure. CLI exit code 3.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed manifest, config, or payload content. CLI exit code 3.
class ParseError : public Error {
public:
    using Error::Error;
};

// Network failure talking to a remote model server. CLI exit code 4.
class TransportError : public Error {
public:
    TransportError(std::string endpoint, int status, double elapsed_ms, const std::string& detail)
        : Error("transport error [" + endpoint + "] status=" + std::to_string(status) +
                " elapsed_ms=" + std::to_string(elapsed_ms) + ": " + detail),
          endpoint_(std::move(endpoint)),
          status_(status),
          elapsed_ms_(elapsed_ms) {}

    const std::string& endpoint() const { return endpoint_; }
    int status() const { return status_; }
    double elapsed_ms() const { return elapsed_ms_; }

private:
    std::string endpoint_;
    int status_ = 0;
    double elapsed_ms_ = 0.0;
};

// Failure inside a decoding loop; names the conditioning context and step.
// `transport` marks failures whose root cause was a TransportError.
class DecodeError : public Error {
public:
    DecodeError(std::string context, int step, const std::string& detail, bool transport = false)
        : Error("decode error in context '" + context + "' at step " + std::to_string(step) +
                ": " + detail),
          context_(std::move(context)),
          step_(step),
          transport_(transport) {}

    const std::string& context() const { return context_; }
    int step() const { return step_; }
    bool transport() const { return transport_; }

private:
    std::string context_;
    int step_ = 0;
    bool transport_ = false;
};

} // namespace chainshot
