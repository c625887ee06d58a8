#pragma once

#include <stdexcept>
#include <string>

namespace sobdub {

/// Malformed input: bad parameters, unreadable files, unknown point ids.
/// The CLI maps this to exit code 2.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A ball with no sample points in it. Signals a resolution that is too
/// coarse for the requested radius.
class EmptyBall : public InvalidInput {
public:
    EmptyBall() : InvalidInput("ball contains no sample points") {}
    explicit EmptyBall(const std::string& what) : InvalidInput(what) {}
};

/// A mathematical certificate did not hold. On shipped configurations this
/// indicates an implementation bug; the CLI maps it to exit code 1.
class CertificateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sobdub
