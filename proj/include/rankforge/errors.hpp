#pragma once

#include <stdexcept>
#include <string>

namespace rankforge {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arithmetic outside the field's domain (finv(0), non-prime modulus).
class DomainError : public Error {
public:
    using Error::Error;
};

// Mismatched vector lengths or shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Operation applied to a map of unsupported arity.
class ArityError : public Error {
public:
    using Error::Error;
};

// Polarization requested with degree >= characteristic.
class CharacteristicError : public Error {
public:
    using Error::Error;
};

// A stated precondition on the inputs does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Internal/external approximation requested for a family that does not
// satisfy the containment the mode requires.
class ContainmentError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// Malformed input files.
class InputError : public Error {
public:
    using Error::Error;
};

// An enumeration or table would exceed the configured resource guard.
class ResourceError : public Error {
public:
    using Error::Error;
};

// A proven identity or inequality failed to hold. Always a bug.
class VerificationError : public Error {
public:
    using Error::Error;
};

} // namespace rankforge
