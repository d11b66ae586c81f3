#pragma once

#include <stdexcept>
#include <string>

namespace xmodal {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated on-disk data (bad magic, bad version, bad counts).
struct FormatError : Error {
    using Error::Error;
};

/// Filesystem-level failure (cannot open, cannot write).
struct IoError : Error {
    using Error::Error;
};

/// Vector length does not match the dimensionality in effect.
struct DimensionError : Error {
    using Error::Error;
};

/// The same item id was seen twice where ids must be unique.
struct DuplicateIdError : Error {
    using Error::Error;
};

/// A configuration value is out of range, missing, or inconsistent.
struct ConfigError : Error {
    using Error::Error;
};

/// Input data violates a precondition (e.g. negative components where
/// non-negative ones are required).
struct DomainError : Error {
    using Error::Error;
};

/// A codebook build was asked to run on an empty concept pool.
struct EmptyPoolError : Error {
    using Error::Error;
};

/// Fewer data points than the requested codebook size.
struct InsufficientDataError : Error {
    using Error::Error;
};

/// An operation that needs a non-empty vector received an empty one.
struct EmptyVectorError : Error {
    using Error::Error;
};

/// A referenced item id does not exist in the collection at hand.
struct UnknownIdError : Error {
    using Error::Error;
};

}  // namespace xmodal
