#pragma once

#include <stdexcept>
#include <string>

namespace trifuse {

// Base class for everything the library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: bad arguments, wrong strategy, spent tape, invalid config.
// The CLI maps this to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

// Tensor dimension mismatches. A kind of usage error that tests and call
// sites often want to catch specifically.
class ShapeError : public UsageError {
public:
    using UsageError::UsageError;
};

// Malformed or missing input data: files, manifests, payloads, feature
// vectors. The CLI maps this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

// External captioner adapter failures (spawn, timeout, nonzero exit).
// The CLI maps this to exit code 3.
class AdapterError : public Error {
public:
    using Error::Error;
};

}  // namespace trifuse
