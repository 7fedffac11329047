#pragma once

#include <stdexcept>
#include <string>

namespace rdkg {

// Malformed or inconsistent input: bad files, shape mismatches, contract violations.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values or solver breakdown during a numerical routine.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure talking to an external service (embedding endpoint, LLM endpoint).
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rdkg
