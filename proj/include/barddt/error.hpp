#pragma once

#include <stdexcept>
#include <string>

namespace barddt {

// Runtime failure inside the library (bad data, numeric breakdown, I/O).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input to the command line or configuration layer.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace barddt
