#ifndef CRNSYNTH_ERROR_HPP
#define CRNSYNTH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace crnsynth {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatches, non-bimolecular reactions, bad JSON.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its precondition (e.g. firing a disabled reaction).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A specification cannot be used as given (empty initial set, unbounded totals).
class SpecificationError : public Error {
public:
    using Error::Error;
};

/// A configured size limit was exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or probability drift beyond tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The solver process died, answered something unparseable, or returned unknown.
class BackendError : public Error {
public:
    BackendError(const std::string& what, std::string transcript = {})
        : Error(what), transcript_(std::move(transcript)) {}

    const std::string& transcript() const noexcept { return transcript_; }

private:
    std::string transcript_;
};

/// The solver did not answer before its deadline.
class TimeoutError : public Error {
public:
    using Error::Error;
};

} // namespace crnsynth

#endif
