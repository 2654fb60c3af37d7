#pragma once

#include <stdexcept>
#include <string>

namespace voxrefine {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem level failure (missing file, short write, ...).
class IoError : public Error {
public:
    using Error::Error;
};

/// A file was readable but its contents do not match the expected layout.
class FormatError : public Error {
public:
    FormatError(const std::string& file, const std::string& what)
        : Error(file + ": " + what), file_(file) {}

    const std::string& file() const noexcept { return file_; }

private:
    std::string file_;
};

/// NaN/Inf produced where a finite value is required.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace voxrefine
