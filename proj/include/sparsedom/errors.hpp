#pragma once

#include <stdexcept>
#include <string>

namespace sparsedom {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range dimension, depth, exponent or other scalar parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Subdivision requested on a finest-level cube.
class LeafError : public Error {
public:
    using Error::Error;
};

/// A weight (or weight power) has zero mass on a cube where a ratio needs it.
class DegenerateWeightError : public Error {
public:
    using Error::Error;
};

class EllipticityError : public Error {
public:
    using Error::Error;
};

/// Operator spectrum touches zero where a negative power is required.
class SpectrumError : public Error {
public:
    using Error::Error;
};

/// Function support escapes the cube handed to the sparse construction.
class SupportError : public Error {
public:
    using Error::Error;
};

class EmptySampleError : public Error {
public:
    using Error::Error;
};

/// A family failed the sparseness certificate where a verified one was needed.
class SparsenessError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sparsedom
