#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Argument outside the mathematical domain of an operation
/// (non-integrable weight, p <= 1, eps <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Grid or experiment set up inconsistently (bad grading, support does not fit).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller misuse: mismatched lengths, wrong grid for a function, ...
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that makes a quotient meaningless (zero denominator, all-zero init).
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter tuple violating the validity rules of its mode. The message
/// names the violated clause, e.g. "beta < k violated".
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hardy
