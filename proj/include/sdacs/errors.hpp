#pragma once
#include <stdexcept>
#include <string>

namespace sdacs {

// File and format failures carry one distinct type per cause so callers can
// react to (and tests can assert on) the exact failure class.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadMagicError : IoError {
    using IoError::IoError;
};

struct BadVersionError : IoError {
    using IoError::IoError;
};

struct BadArchTagError : IoError {
    using IoError::IoError;
};

struct BadDimensionError : IoError {
    using IoError::IoError;
};

struct TruncatedFileError : IoError {
    using IoError::IoError;
};

// Malformed header fields, trailing bytes, non-finite payload values.
struct FormatError : IoError {
    using IoError::IoError;
};

}  // namespace sdacs
