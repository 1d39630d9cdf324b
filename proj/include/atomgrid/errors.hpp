#pragma once

#include <stdexcept>
#include <string>

namespace atomgrid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad schema, dangling reference, invalid parameter.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A value lies outside a tabulated range (e.g. escalation year).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Required data points are absent.
class MissingDataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// The requested solver backend is not registered or cannot run here.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

/// Solver breakdown (singular basis, iteration limit, size guard).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A claimed-optimal solution failed the optimality certificate.
class VerificationFailed : public Error {
public:
    using Error::Error;
};

} // namespace atomgrid
