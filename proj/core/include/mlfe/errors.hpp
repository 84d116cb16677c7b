#pragma once

#include <stdexcept>
#include <string>

namespace mlfe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// File exists but its encoding is not one we accept.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A precondition on argument values or geometry was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input is too small for the requested transform or window.
class TooSmall : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Input admits no meaningful result (e.g. calibrating noise on a black image).
class DegenerateInput : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace mlfe
