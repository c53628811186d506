#pragma once

#include <stdexcept>
#include <string>

namespace mvr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Zero-sized grids, mismatched shapes, channel mismatches.
class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class MissingViewError : public Error {
public:
    using Error::Error;
};

class MissingProbeError : public Error {
public:
    using Error::Error;
};

class CapExceededError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class CorruptHeaderError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
public:
    using FormatError::FormatError;
};

class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace mvr
